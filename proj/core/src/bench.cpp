#include "graphem/bench.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "graphem/io.hpp"

namespace graphem {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start)
        .count();
}

// Index-order results make the reduction independent of scheduling.
template <typename F>
void parallel_for(int count, F&& body) {
    const int workers = std::min(worker_count(), count);
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                const int i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    body(i);
                } catch (...) {
                    std::scoped_lock lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

struct Realization {
    Matrix a_true;
    StateSpaceModel model;
    Trajectory trajectory;
    Matrix a0;
};

Realization make_realization(const ExperimentSpec& spec, int index) {
    const BlockSpec block = spec.block_spec();
    Rng rng(spec.base_seed + static_cast<std::uint64_t>(index));
    Realization r;
    r.a_true = generate_block_transition(block, rng);
    r.model = make_isotropic_model(r.a_true, block.noise);
    r.trajectory = simulate(r.model, spec.steps, rng);
    r.a0 = random_stable_dense(block.state_dim(), 0.5, rng);
    return r;
}

struct RunOutcome {
    EdgeReport report;
    bool failed = false;
    std::string message;
    bool descent_violation = false;
    bool non_converged = false;
    double wall_ms = 0.0;
};

bool trace_descends(const FitTrace& trace) {
    for (std::size_t i = 1; i < trace.objective_values.size(); ++i) {
        if (trace.objective_values[i] > trace.objective_values[i - 1] + 1e-6) {
            return false;
        }
    }
    return true;
}

RunOutcome run_method(const ExperimentSpec& spec, Method method,
                      const Realization& r) {
    RunOutcome out;
    const auto start = Clock::now();
    try {
        switch (method) {
            case Method::GraphEm: {
                FitTrace trace =
                    graphem_fit(r.model, r.trajectory.observations,
                                spec.graphem_config(), r.a0);
                out.report =
                    score(trace.final_A, r.a_true, spec.binarize_threshold);
                out.descent_violation = !trace_descends(trace);
                out.non_converged = !trace.converged;
                break;
            }
            case Method::Mlem: {
                FitTrace trace =
                    mlem_fit(r.model, r.trajectory.observations, spec.em_tol,
                             spec.max_em_iters, r.a0);
                out.report =
                    score(trace.final_A, r.a_true, spec.binarize_threshold);
                out.descent_violation = !trace_descends(trace);
                out.non_converged = !trace.converged;
                break;
            }
            case Method::Pgc: {
                Matrix series = observations_as_series(r.trajectory.observations);
                out.report = score(pairwise_gc(series, spec.lag, spec.alpha),
                                   r.a_true, spec.binarize_threshold);
                break;
            }
            case Method::Cgc: {
                Matrix series = observations_as_series(r.trajectory.observations);
                out.report = score(conditional_gc(series, spec.lag, spec.alpha),
                                   r.a_true, spec.binarize_threshold);
                break;
            }
        }
    } catch (const std::exception& err) {
        out.failed = true;
        out.message = err.what();
    }
    out.wall_ms = ms_since(start);
    return out;
}

nlohmann::ordered_json report_json(const EdgeReport& report) {
    return nlohmann::ordered_json::parse(to_json(report));
}

nlohmann::ordered_json spec_json(const ExperimentSpec& spec) {
    nlohmann::ordered_json j;
    if (spec.dataset) {
        j["dataset"] = to_string(*spec.dataset);
    } else {
        j["dataset"] = "custom";
    }
    const BlockSpec block = spec.block_spec();
    j["blocks"] = block.block_sizes;
    j["sigma_q"] = block.noise.sigma_q;
    j["sigma_r"] = block.noise.sigma_r;
    j["sigma_p"] = block.noise.sigma_p;
    j["k"] = spec.steps;
    j["realizations"] = spec.n_realizations;
    std::vector<std::string> methods;
    for (Method m : spec.methods) methods.push_back(to_string(m));
    j["methods"] = methods;
    j["gamma"] = spec.gamma;
    j["theta"] = spec.theta;
    j["dr_tol"] = spec.dr_tol;
    j["em_tol"] = spec.em_tol;
    j["max_em_iters"] = spec.max_em_iters;
    j["max_dr_iters"] = spec.max_dr_iters;
    j["lag"] = spec.lag;
    j["alpha"] = spec.alpha;
    j["threshold"] = spec.binarize_threshold;
    j["base_seed"] = spec.base_seed;
    return j;
}

std::string format_cell(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

}  // namespace

std::string to_string(Dataset id) {
    switch (id) {
        case Dataset::A: return "A";
        case Dataset::B: return "B";
        case Dataset::C: return "C";
        case Dataset::D: return "D";
    }
    return "?";
}

std::string to_string(Method m) {
    switch (m) {
        case Method::GraphEm: return "graphem";
        case Method::Mlem: return "mlem";
        case Method::Pgc: return "pgc";
        case Method::Cgc: return "cgc";
    }
    return "?";
}

std::optional<Dataset> dataset_from_string(const std::string& s) {
    if (s == "A" || s == "a") return Dataset::A;
    if (s == "B" || s == "b") return Dataset::B;
    if (s == "C" || s == "c") return Dataset::C;
    if (s == "D" || s == "d") return Dataset::D;
    return std::nullopt;
}

std::optional<Method> method_from_string(const std::string& s) {
    if (s == "graphem") return Method::GraphEm;
    if (s == "mlem") return Method::Mlem;
    if (s == "pgc") return Method::Pgc;
    if (s == "cgc") return Method::Cgc;
    return std::nullopt;
}

BlockSpec dataset_spec(Dataset id) {
    switch (id) {
        case Dataset::A: return {{3, 3, 3}, {1e-1, 1e-1, 1e-4}};
        case Dataset::B: return {{3, 3, 3}, {1.0, 1.0, 1e-4}};
        case Dataset::C: return {{3, 5, 5, 3}, {1e-1, 1e-1, 1e-4}};
        case Dataset::D: return {{3, 5, 5, 3}, {1.0, 1.0, 1e-4}};
    }
    throw std::invalid_argument("unknown dataset");
}

BlockSpec ExperimentSpec::block_spec() const {
    return dataset ? dataset_spec(*dataset) : custom;
}

GraphEmConfig ExperimentSpec::graphem_config() const {
    GraphEmConfig config;
    config.gamma = gamma;
    config.theta = theta;
    config.dr_tol = dr_tol;
    config.em_tol = em_tol;
    config.max_em_iters = max_em_iters;
    config.max_dr_iters = max_dr_iters;
    const double sq = block_spec().noise.sigma_q;
    config.sigma_q2 = sq * sq;
    return config;
}

void ExperimentSpec::validate() const {
    block_spec().validate();
    if (steps < 1) throw std::invalid_argument("K must be >= 1");
    if (n_realizations < 1) {
        throw std::invalid_argument("n_realizations must be >= 1");
    }
    if (methods.empty()) throw std::invalid_argument("no methods requested");
    graphem_config().validate();
    if (lag < 1) throw std::invalid_argument("lag must be >= 1");
    if (alpha <= 0 || alpha >= 1) {
        throw std::invalid_argument("alpha must lie in (0, 1)");
    }
    if (binarize_threshold < 0) {
        throw std::invalid_argument("threshold must be >= 0");
    }
}

EdgeReportMean mean_report(const std::vector<EdgeReport>& reports) {
    EdgeReportMean mean;
    if (reports.empty()) return mean;
    const double n = static_cast<double>(reports.size());
    double rmse_sum = 0.0;
    bool has_rmse = true;
    for (const EdgeReport& r : reports) {
        mean.accuracy += r.accuracy / n;
        mean.precision += r.precision / n;
        mean.recall += r.recall / n;
        mean.specificity += r.specificity / n;
        mean.f1 += r.f1 / n;
        mean.tp += static_cast<double>(r.tp) / n;
        mean.fp += static_cast<double>(r.fp) / n;
        mean.tn += static_cast<double>(r.tn) / n;
        mean.fn += static_cast<double>(r.fn) / n;
        if (r.rmse) {
            rmse_sum += *r.rmse;
        } else {
            has_rmse = false;
        }
    }
    if (has_rmse) mean.rmse = rmse_sum / n;
    return mean;
}

int worker_count() {
    if (const char* env = std::getenv("GRAPHEM_WORKERS")) {
        const int parsed = std::atoi(env);
        if (parsed > 0) return parsed;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

BenchReport run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    const auto start = Clock::now();

    std::vector<std::vector<RunOutcome>> outcomes(
        spec.methods.size(), std::vector<RunOutcome>(spec.n_realizations));
    parallel_for(spec.n_realizations, [&](int r) {
        const Realization real = make_realization(spec, r);
        for (std::size_t m = 0; m < spec.methods.size(); ++m) {
            outcomes[m][r] = run_method(spec, spec.methods[m], real);
        }
    });

    BenchReport report;
    report.spec = spec;
    for (std::size_t m = 0; m < spec.methods.size(); ++m) {
        MethodSummary summary;
        summary.method = spec.methods[m];
        for (const RunOutcome& out : outcomes[m]) {
            summary.wall_ms_total += out.wall_ms;
            if (out.failed) {
                ++summary.failures;
                if (summary.failure_messages.size() < 5) {
                    summary.failure_messages.push_back(out.message);
                }
                continue;
            }
            summary.raw.push_back(out.report);
            if (out.descent_violation) ++summary.descent_violations;
            if (out.non_converged) ++summary.non_converged;
        }
        summary.mean = mean_report(summary.raw);
        summary.wall_ms_mean = summary.wall_ms_total / spec.n_realizations;
        if (summary.failures > 0) {
            report.warnings.push_back(to_string(summary.method) + ": " +
                                      std::to_string(summary.failures) +
                                      " realization(s) failed and were "
                                      "excluded from the means");
        }
        report.results.push_back(std::move(summary));
    }
    if (spec.n_realizations < 50) {
        report.warnings.push_back(
            "reduced statistical power: only " +
            std::to_string(spec.n_realizations) +
            " realization(s); reference protocol uses 50");
    }
    report.wall_ms_total = ms_since(start);
    return report;
}

GammaSearch tune_gamma(const ExperimentSpec& spec,
                       const std::vector<double>& gamma_grid) {
    spec.validate();
    if (gamma_grid.empty()) {
        throw std::invalid_argument("gamma grid must not be empty");
    }
    // held-out realization, outside the 0..n_realizations-1 evaluation range
    const Realization real = make_realization(spec, spec.n_realizations);

    GammaSearch search;
    search.table.resize(gamma_grid.size());
    parallel_for(static_cast<int>(gamma_grid.size()), [&](int i) {
        ExperimentSpec pt = spec;
        pt.gamma = gamma_grid[i];
        FitTrace trace = graphem_fit(real.model, real.trajectory.observations,
                                     pt.graphem_config(), real.a0);
        search.table[i] = {gamma_grid[i],
                           score(trace.final_A, real.a_true,
                                 spec.binarize_threshold)};
    });

    search.best_gamma = search.table.front().gamma;
    double best_accuracy = search.table.front().report.accuracy;
    for (const GammaScore& row : search.table) {
        // ties go to the larger gamma (sparser model)
        if (row.report.accuracy > best_accuracy ||
            (row.report.accuracy == best_accuracy &&
             row.gamma > search.best_gamma)) {
            best_accuracy = row.report.accuracy;
            search.best_gamma = row.gamma;
        }
    }
    return search;
}

std::vector<double> default_gamma_grid() {
    return {1.0, 2.0, 5.0, 10.0, 15.0, 25.0, 50.0, 75.0, 100.0, 150.0};
}

std::string render_table(const BenchReport& report) {
    const BlockSpec block = report.spec.block_spec();
    std::string title = report.spec.dataset
                            ? "dataset " + to_string(*report.spec.dataset)
                            : "custom dataset";
    std::string blocks;
    for (std::size_t i = 0; i < block.block_sizes.size(); ++i) {
        if (i > 0) blocks += ",";
        blocks += std::to_string(block.block_sizes[i]);
    }
    std::string out = title + "  (blocks " + blocks + "; K=" +
                      std::to_string(report.spec.steps) + "; " +
                      std::to_string(report.spec.n_realizations) +
                      " realizations)\n";
    out +=
        "method   | RMSE   | accur. | prec.  | recall | spec.  | F1\n"
        "---------+--------+--------+--------+--------+--------+-------\n";
    for (const MethodSummary& s : report.results) {
        std::string name = to_string(s.method);
        name.resize(8, ' ');
        out += name + " | ";
        out += (s.mean.rmse ? format_cell(*s.mean.rmse) : std::string("-     "));
        out += " | " + format_cell(s.mean.accuracy);
        out += " | " + format_cell(s.mean.precision);
        out += " | " + format_cell(s.mean.recall);
        out += " | " + format_cell(s.mean.specificity);
        out += " | " + format_cell(s.mean.f1);
        out += '\n';
    }
    for (const std::string& w : report.warnings) {
        out += "warning: " + w + "\n";
    }
    return out;
}

std::string to_json(const BenchReport& report) {
    nlohmann::ordered_json j;
    j["spec"] = spec_json(report.spec);
    nlohmann::ordered_json results = nlohmann::ordered_json::object();
    for (const MethodSummary& s : report.results) {
        nlohmann::ordered_json m;
        nlohmann::ordered_json mean;
        if (s.mean.rmse) mean["rmse"] = *s.mean.rmse;
        mean["accuracy"] = s.mean.accuracy;
        mean["precision"] = s.mean.precision;
        mean["recall"] = s.mean.recall;
        mean["specificity"] = s.mean.specificity;
        mean["f1"] = s.mean.f1;
        mean["tp"] = s.mean.tp;
        mean["fp"] = s.mean.fp;
        mean["tn"] = s.mean.tn;
        mean["fn"] = s.mean.fn;
        m["mean"] = mean;
        nlohmann::ordered_json raw = nlohmann::ordered_json::array();
        for (const EdgeReport& r : s.raw) raw.push_back(report_json(r));
        m["raw"] = raw;
        m["failures"] = s.failures;
        m["failure_messages"] = s.failure_messages;
        m["descent_violations"] = s.descent_violations;
        m["non_converged"] = s.non_converged;
        m["wall_ms_mean"] = s.wall_ms_mean;
        m["wall_ms_total"] = s.wall_ms_total;
        results[to_string(s.method)] = m;
    }
    j["results"] = results;
    j["warnings"] = report.warnings;
    j["wall_ms_total"] = report.wall_ms_total;
    return j.dump(2);
}

std::string to_json(const GammaSearch& search) {
    nlohmann::ordered_json j;
    j["best_gamma"] = search.best_gamma;
    nlohmann::ordered_json table = nlohmann::ordered_json::array();
    for (const GammaScore& row : search.table) {
        nlohmann::ordered_json entry;
        entry["gamma"] = row.gamma;
        entry["report"] = report_json(row.report);
        table.push_back(entry);
    }
    j["table"] = table;
    return j.dump(2);
}

}  // namespace graphem
