#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "graphem/graph_em.hpp"
#include "graphem/metrics.hpp"

namespace graphem {

enum class Dataset { A, B, C, D };
enum class Method { GraphEm, Mlem, Pgc, Cgc };

std::string to_string(Dataset id);
std::string to_string(Method m);
std::optional<Dataset> dataset_from_string(const std::string& s);
std::optional<Method> method_from_string(const std::string& s);

/// Preset block layouts and noise scales:
///   A: blocks (3,3,3),   (sigma_Q, sigma_R, sigma_P) = (1e-1, 1e-1, 1e-4)
///   B: blocks (3,3,3),   (1, 1, 1e-4)
///   C: blocks (3,5,5,3), (1e-1, 1e-1, 1e-4)
///   D: blocks (3,5,5,3), (1, 1, 1e-4)
BlockSpec dataset_spec(Dataset id);

struct ExperimentSpec {
    std::optional<Dataset> dataset;  // preset; `custom` is used when empty
    BlockSpec custom;
    int steps = 1000;        // K
    int n_realizations = 50;
    std::vector<Method> methods = {Method::GraphEm, Method::Mlem, Method::Pgc,
                                   Method::Cgc};
    double gamma = 50.0;     // l1 weight used for GraphEm runs
    double theta = 1.0;
    double dr_tol = 1e-3;
    double em_tol = 1e-3;
    int max_em_iters = 50;
    int max_dr_iters = 10000;
    int lag = 1;             // VAR order for PGC/CGC
    double alpha = 0.05;     // significance level for PGC/CGC
    double binarize_threshold = 1e-10;
    std::uint64_t base_seed = 0;

    BlockSpec block_spec() const;
    GraphEmConfig graphem_config() const;
    void validate() const;
};

/// Arithmetic averages of per-realization reports; counts become fractional.
struct EdgeReportMean {
    std::optional<double> rmse;
    double accuracy = 0.0, precision = 0.0, recall = 0.0, specificity = 0.0,
           f1 = 0.0;
    double tp = 0.0, fp = 0.0, tn = 0.0, fn = 0.0;
};

EdgeReportMean mean_report(const std::vector<EdgeReport>& reports);

struct MethodSummary {
    Method method = Method::GraphEm;
    EdgeReportMean mean;
    std::vector<EdgeReport> raw;        // successful realizations, in order
    int failures = 0;
    std::vector<std::string> failure_messages;
    int descent_violations = 0;         // EM objective increases beyond 1e-6
    int non_converged = 0;              // fits that hit max_em_iters
    double wall_ms_mean = 0.0;
    double wall_ms_total = 0.0;
};

struct BenchReport {
    ExperimentSpec spec;
    std::vector<MethodSummary> results;
    std::vector<std::string> warnings;
    double wall_ms_total = 0.0;
};

/// Runs every requested method on n_realizations seeded systems drawn from
/// the dataset spec and aggregates edge-detection scores. Realization r uses
/// seed base_seed + r; results are deterministic given base_seed regardless
/// of worker count (workers from GRAPHEM_WORKERS, default hardware
/// concurrency).
BenchReport run_experiment(const ExperimentSpec& spec);

struct GammaScore {
    double gamma = 0.0;
    EdgeReport report;
};

struct GammaSearch {
    double best_gamma = 0.0;
    std::vector<GammaScore> table;  // one row per grid point
};

/// Grid search for the l1 weight on a single held-out realization (seed
/// base_seed + n_realizations), maximizing edge-detection accuracy. Ties go
/// to the larger gamma (sparser model).
GammaSearch tune_gamma(const ExperimentSpec& spec,
                       const std::vector<double>& gamma_grid);

/// Grid used when the caller does not supply one.
std::vector<double> default_gamma_grid();

/// Plain-text table: one row per method, columns RMSE, accur., prec.,
/// recall, spec., F1.
std::string render_table(const BenchReport& report);

std::string to_json(const BenchReport& report);
std::string to_json(const GammaSearch& search);

/// Worker count for parallel sections: GRAPHEM_WORKERS when set and positive,
/// otherwise hardware concurrency.
int worker_count();

}  // namespace graphem
