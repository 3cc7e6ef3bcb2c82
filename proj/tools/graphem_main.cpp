#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "graphem/bench.hpp"
#include "graphem/graph_em.hpp"
#include "graphem/io.hpp"
#include "graphem/metrics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct Options {
    std::string dataset;
    std::vector<int> blocks;
    double sigma_q = 1.0;
    double sigma_r = 1.0;
    double sigma_p = 1e-4;
    int k = 1000;
    int realizations = 50;
    std::string methods = "graphem,mlem,pgc,cgc";
    std::uint64_t seed = 0;
    bool seed_given = false;
    double gamma = 10.0;
    bool gamma_given = false;
    std::vector<double> gamma_grid;
    double theta = 1.0;
    double dr_tol = 1e-3;
    double em_tol = 1e-3;
    int max_iters = 50;
    int max_dr_iters = 10000;
    int lag = 1;
    double alpha = 0.05;
    double threshold = 1e-10;
    std::string out_dir = ".";
    std::string config_path;
    std::string out;
    std::string states_out;
    std::string a_out;
    std::string method;
    std::string input;
    std::string truth;
};

const std::vector<std::string> kConfigKeys = {
    "dataset",  "blocks",       "sigma_q",   "sigma_r",    "sigma_p",
    "k",        "realizations", "methods",   "seed",       "gamma",
    "gamma_grid", "theta",      "dr_tol",    "em_tol",     "max_em_iters",
    "max_dr_iters", "lag",      "alpha",     "threshold",  "out_dir"};

// The config file overrides command-line flags, which override defaults.
void apply_config(Options& o) {
    if (o.config_path.empty()) return;
    std::ifstream in(o.config_path);
    if (!in) {
        throw graphem::ParseError("cannot open config file " + o.config_path);
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& err) {
        throw graphem::ParseError(o.config_path + ": " + err.what());
    }
    if (!doc.is_object()) {
        throw graphem::ParseError(o.config_path + ": top level must be an object");
    }
    for (const auto& [key, value] : doc.items()) {
        if (std::find(kConfigKeys.begin(), kConfigKeys.end(), key) ==
            kConfigKeys.end()) {
            std::string valid;
            for (const auto& k : kConfigKeys) {
                if (!valid.empty()) valid += ", ";
                valid += k;
            }
            throw graphem::ParseError(o.config_path + ": unknown key '" + key +
                                      "'; valid keys: " + valid);
        }
        try {
            if (key == "dataset") o.dataset = value.get<std::string>();
            else if (key == "blocks") o.blocks = value.get<std::vector<int>>();
            else if (key == "sigma_q") o.sigma_q = value.get<double>();
            else if (key == "sigma_r") o.sigma_r = value.get<double>();
            else if (key == "sigma_p") o.sigma_p = value.get<double>();
            else if (key == "k") o.k = value.get<int>();
            else if (key == "realizations") o.realizations = value.get<int>();
            else if (key == "methods") o.methods = value.get<std::string>();
            else if (key == "seed") {
                o.seed = value.get<std::uint64_t>();
                o.seed_given = true;
            } else if (key == "gamma") {
                o.gamma = value.get<double>();
                o.gamma_given = true;
            } else if (key == "gamma_grid") {
                o.gamma_grid = value.get<std::vector<double>>();
            }
            else if (key == "theta") o.theta = value.get<double>();
            else if (key == "dr_tol") o.dr_tol = value.get<double>();
            else if (key == "em_tol") o.em_tol = value.get<double>();
            else if (key == "max_em_iters") o.max_iters = value.get<int>();
            else if (key == "max_dr_iters") o.max_dr_iters = value.get<int>();
            else if (key == "lag") o.lag = value.get<int>();
            else if (key == "alpha") o.alpha = value.get<double>();
            else if (key == "threshold") o.threshold = value.get<double>();
            else if (key == "out_dir") o.out_dir = value.get<std::string>();
        } catch (const json::exception& err) {
            throw graphem::ParseError(o.config_path + ": key '" + key +
                                      "': " + err.what());
        }
    }
}

std::uint64_t effective_seed(Options& o) {
    if (!o.seed_given) {
        o.seed = std::random_device{}();
        o.seed_given = true;
    }
    return o.seed;
}

std::vector<graphem::Method> parse_methods(const std::string& csv) {
    std::vector<graphem::Method> methods;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        auto m = graphem::method_from_string(item);
        if (!m) {
            throw std::invalid_argument(
                "unknown method '" + item +
                "'; valid methods: graphem, mlem, pgc, cgc");
        }
        methods.push_back(*m);
    }
    if (methods.empty()) throw std::invalid_argument("no methods given");
    return methods;
}

graphem::BlockSpec resolve_blocks(const Options& o) {
    if (!o.dataset.empty()) {
        auto id = graphem::dataset_from_string(o.dataset);
        if (!id) {
            throw std::invalid_argument("unknown dataset '" + o.dataset +
                                        "'; valid: A, B, C, D");
        }
        return graphem::dataset_spec(*id);
    }
    if (o.blocks.empty()) {
        throw std::invalid_argument(
            "either --dataset or --blocks must be given");
    }
    return {o.blocks, {o.sigma_q, o.sigma_r, o.sigma_p}};
}

graphem::ExperimentSpec make_experiment_spec(const Options& o,
                                             const std::string& dataset_name) {
    graphem::ExperimentSpec spec;
    auto id = graphem::dataset_from_string(dataset_name);
    if (id) {
        spec.dataset = *id;
    } else {
        spec.custom = resolve_blocks(o);
    }
    spec.steps = o.k;
    spec.n_realizations = o.realizations;
    spec.methods = parse_methods(o.methods);
    spec.gamma = o.gamma;
    spec.theta = o.theta;
    spec.dr_tol = o.dr_tol;
    spec.em_tol = o.em_tol;
    spec.max_em_iters = o.max_iters;
    spec.max_dr_iters = o.max_dr_iters;
    spec.lag = o.lag;
    spec.alpha = o.alpha;
    spec.binarize_threshold = o.threshold;
    spec.base_seed = o.seed;
    return spec;
}

int cmd_simulate(Options& o) {
    const graphem::BlockSpec block = resolve_blocks(o);
    graphem::Rng rng(effective_seed(o));
    const graphem::Matrix a = graphem::generate_block_transition(block, rng);
    const graphem::StateSpaceModel model =
        graphem::make_isotropic_model(a, block.noise);
    const graphem::Trajectory traj = graphem::simulate(model, o.k, rng);

    graphem::write_observations_csv(o.out, traj.observations);
    std::cout << "wrote " << o.out << " (" << traj.length() << " steps, "
              << model.obs_dim() << " series)\n";
    if (!o.states_out.empty()) {
        graphem::write_states_csv(o.states_out, traj.states);
        std::cout << "wrote " << o.states_out << "\n";
    }
    if (!o.a_out.empty()) {
        graphem::write_matrix_csv(o.a_out, a);
        std::cout << "wrote " << o.a_out << "\n";
    }
    std::cout << "seed: " << o.seed << "\n";
    return 0;
}

void write_edge_report(const fs::path& dir, const graphem::EdgeReport& report) {
    graphem::write_file_atomic(dir / "edge_report.json",
                               graphem::to_json(report) + "\n");
    std::cout << "edge report: " << graphem::to_json(report) << "\n";
}

int cmd_fit(Options& o) {
    const auto method = graphem::method_from_string(o.method);
    if (!method) {
        throw std::invalid_argument("unknown method '" + o.method +
                                    "'; valid methods: graphem, mlem, pgc, cgc");
    }
    const auto observations = graphem::read_observations_csv(o.input);
    const int n = static_cast<int>(observations.front().size());
    std::optional<graphem::Matrix> truth;
    if (!o.truth.empty()) {
        truth = graphem::read_matrix_csv(o.truth);
        if (truth->rows() != n || truth->cols() != n) {
            throw std::invalid_argument("truth matrix must be " +
                                        std::to_string(n) + "x" +
                                        std::to_string(n));
        }
    }

    const fs::path dir = o.out_dir;
    fs::create_directories(dir);

    json summary;
    summary["method"] = o.method;
    summary["input"] = o.input;

    if (*method == graphem::Method::GraphEm || *method == graphem::Method::Mlem) {
        graphem::Rng rng(effective_seed(o));
        const graphem::Matrix a0 = graphem::random_stable_dense(n, 0.5, rng);
        const graphem::StateSpaceModel model = graphem::make_isotropic_model(
            graphem::Matrix::Zero(n, n), {o.sigma_q, o.sigma_r, o.sigma_p});

        graphem::FitTrace trace;
        if (*method == graphem::Method::GraphEm) {
            graphem::GraphEmConfig config;
            config.gamma = o.gamma;
            config.theta = o.theta;
            config.dr_tol = o.dr_tol;
            config.em_tol = o.em_tol;
            config.max_em_iters = o.max_iters;
            config.max_dr_iters = o.max_dr_iters;
            config.sigma_q2 = o.sigma_q * o.sigma_q;
            trace = graphem::graphem_fit(model, observations, config, a0);
            summary["gamma"] = o.gamma;
            summary["theta"] = o.theta;
            summary["sigma_q"] = o.sigma_q;
        } else {
            trace = graphem::mlem_fit(model, observations, o.em_tol,
                                      o.max_iters, a0);
        }
        summary["seed"] = o.seed;
        summary["iterations"] = trace.iterations;
        summary["converged"] = trace.converged;
        summary["objective_values"] = trace.objective_values;

        graphem::write_matrix_csv(dir / "A_hat.csv", trace.final_A);
        graphem::write_adjacency_csv(
            dir / "adjacency.csv", graphem::binarize(trace.final_A, o.threshold));
        graphem::write_file_atomic(dir / "graph.dot",
                                   graphem::to_dot(trace.final_A, o.threshold));
        graphem::write_file_atomic(dir / "summary.json", summary.dump(2) + "\n");
        if (truth) write_edge_report(dir, graphem::score(trace.final_A, *truth,
                                                         o.threshold));
        std::cout << "fit " << o.method << ": " << trace.iterations
                  << " iterations, converged=" << (trace.converged ? "yes" : "no")
                  << "\nseed: " << o.seed << "\n";
    } else {
        const graphem::Matrix series =
            graphem::observations_as_series(observations);
        graphem::BinaryGraph graph =
            (*method == graphem::Method::Pgc)
                ? graphem::pairwise_gc(series, o.lag, o.alpha)
                : graphem::conditional_gc(series, o.lag, o.alpha);
        summary["lag"] = o.lag;
        summary["alpha"] = o.alpha;

        graphem::write_adjacency_csv(dir / "adjacency.csv", graph.adjacency);
        graphem::write_file_atomic(dir / "graph.dot",
                                   graphem::to_dot(graph.adjacency));
        graphem::write_file_atomic(dir / "summary.json", summary.dump(2) + "\n");
        if (truth) write_edge_report(dir, graphem::score(graph, *truth,
                                                         o.threshold));
        std::cout << "fit " << o.method << ": binary graph with "
                  << graph.adjacency.cast<int>().sum() << " edges\n";
    }
    std::cout << "outputs in " << dir.string() << "\n";
    return 0;
}

int cmd_benchmark(Options& o) {
    effective_seed(o);
    std::vector<std::string> names;
    if (o.dataset == "all") {
        names = {"A", "B", "C", "D"};
    } else {
        names = {o.dataset};  // may be empty, then --blocks applies
    }
    const fs::path dir = o.out_dir;
    fs::create_directories(dir);

    const std::vector<double> grid =
        o.gamma_grid.empty() ? graphem::default_gamma_grid() : o.gamma_grid;

    for (const std::string& name : names) {
        graphem::ExperimentSpec spec = make_experiment_spec(o, name);
        bool has_graphem = false;
        for (auto m : spec.methods) {
            if (m == graphem::Method::GraphEm) has_graphem = true;
        }
        if (has_graphem && !o.gamma_given) {
            graphem::GammaSearch search = graphem::tune_gamma(spec, grid);
            spec.gamma = search.best_gamma;
            std::cout << "tuned gamma = " << spec.gamma << " for dataset "
                      << (name.empty() ? "custom" : name) << "\n";
        }
        graphem::BenchReport report = graphem::run_experiment(spec);
        const std::string table = graphem::render_table(report);
        std::cout << table << "\n";
        const std::string stem =
            "bench_" + (name.empty() ? std::string("custom") : name);
        graphem::write_file_atomic(dir / (stem + ".json"),
                                   graphem::to_json(report) + "\n");
        graphem::write_file_atomic(dir / (stem + ".txt"), table);
        for (const std::string& w : report.warnings) {
            std::cerr << "warning: " << w << "\n";
        }
    }
    std::cout << "seed: " << o.seed << "\n";
    return 0;
}

int cmd_tune_gamma(Options& o) {
    effective_seed(o);
    graphem::ExperimentSpec spec = make_experiment_spec(o, o.dataset);
    const std::vector<double> grid =
        o.gamma_grid.empty() ? graphem::default_gamma_grid() : o.gamma_grid;
    graphem::GammaSearch search = graphem::tune_gamma(spec, grid);

    std::cout << "gamma    | RMSE   | accur. | F1\n";
    for (const graphem::GammaScore& row : search.table) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "%-8g | %.4f | %.4f | %.4f\n", row.gamma,
                      row.report.rmse.value_or(0.0), row.report.accuracy,
                      row.report.f1);
        std::cout << buf;
    }
    std::cout << "selected gamma: " << search.best_gamma << "\n";
    const fs::path dir = o.out_dir;
    fs::create_directories(dir);
    const std::string stem =
        "tune_" + (o.dataset.empty() ? std::string("custom") : o.dataset);
    graphem::write_file_atomic(dir / (stem + ".json"),
                               graphem::to_json(search) + "\n");
    std::cout << "seed: " << o.seed << "\n";
    return 0;
}

int cmd_export_graph(Options& o) {
    const graphem::Matrix weights = graphem::read_matrix_csv(o.input);
    graphem::write_file_atomic(o.out, graphem::to_dot(weights, o.threshold));
    std::cout << "wrote " << o.out << "\n";
    return 0;
}

void add_model_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--sigma-q", o.sigma_q,
                    "State-noise standard deviation (Q = sigma_q^2 Id)");
    cmd->add_option("--sigma-r", o.sigma_r,
                    "Observation-noise standard deviation");
    cmd->add_option("--sigma-p", o.sigma_p, "Prior standard deviation");
}

void add_fit_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--gamma", o.gamma, "L1 penalty weight")
        ->each([&o](const std::string&) { o.gamma_given = true; });
    cmd->add_option("--theta", o.theta, "Douglas-Rachford step in (0,2)");
    cmd->add_option("--dr-tol", o.dr_tol, "Inner (M-step) stopping tolerance");
    cmd->add_option("--em-tol", o.em_tol, "Outer EM stopping tolerance");
    cmd->add_option("--max-iters", o.max_iters, "Maximum EM iterations");
    cmd->add_option("--max-dr-iters", o.max_dr_iters,
                    "Maximum inner iterations per M-step");
    cmd->add_option("--lag", o.lag, "VAR lag order for pgc/cgc");
    cmd->add_option("--alpha", o.alpha, "Significance level for pgc/cgc");
    cmd->add_option("--threshold", o.threshold,
                    "Absolute value below which entries count as zero");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "graphem: sparse transition-matrix estimation and Granger-causal "
        "graph discovery for linear-Gaussian state-space models.\n"
        "Worker count for benchmark runs comes from GRAPHEM_WORKERS."};
    app.require_subcommand(1);
    Options o;

    auto* sim = app.add_subcommand("simulate",
                                   "Generate a synthetic trajectory CSV");
    sim->add_option("--dataset", o.dataset, "Preset dataset (A, B, C or D)");
    sim->add_option("--blocks", o.blocks, "Custom block sizes, e.g. 3,3,3")
        ->delimiter(',');
    add_model_flags(sim, o);
    sim->add_option("--k", o.k, "Number of time steps");
    sim->add_option("--seed", o.seed, "Random seed")
        ->each([&o](const std::string&) { o.seed_given = true; });
    sim->add_option("--out", o.out, "Observation CSV path")->required();
    sim->add_option("--states-out", o.states_out, "Optional state CSV path");
    sim->add_option("--a-out", o.a_out, "Optional true transition matrix CSV");
    sim->add_option("--config", o.config_path, "JSON config (overrides flags)");

    auto* fit = app.add_subcommand("fit", "Estimate a graph from a CSV series");
    fit->add_option("--method", o.method, "graphem, mlem, pgc or cgc")
        ->required();
    fit->add_option("--input", o.input, "Observation CSV")->required();
    fit->add_option("--truth", o.truth,
                    "Optional true transition matrix CSV for scoring");
    fit->add_option("--seed", o.seed, "Seed for the dense random initial A")
        ->each([&o](const std::string&) { o.seed_given = true; });
    add_model_flags(fit, o);
    add_fit_flags(fit, o);
    fit->add_option("--out-dir", o.out_dir, "Output directory");
    fit->add_option("--config", o.config_path, "JSON config (overrides flags)");

    auto* bench = app.add_subcommand(
        "benchmark", "Run the multi-realization synthetic benchmark");
    bench->add_option("--dataset", o.dataset, "A, B, C, D or all");
    bench->add_option("--blocks", o.blocks, "Custom block sizes")
        ->delimiter(',');
    add_model_flags(bench, o);
    bench->add_option("--methods", o.methods,
                      "Comma-separated subset of graphem,mlem,pgc,cgc");
    bench->add_option("--k", o.k, "Steps per realization");
    bench->add_option("--realizations", o.realizations,
                      "Number of seeded realizations");
    bench->add_option("--seed", o.seed, "Base seed")
        ->each([&o](const std::string&) { o.seed_given = true; });
    bench->add_option("--gamma-grid", o.gamma_grid,
                      "Gamma grid for tuning when --gamma is not fixed")
        ->delimiter(',');
    add_fit_flags(bench, o);
    bench->add_option("--out-dir", o.out_dir, "Output directory");
    bench->add_option("--config", o.config_path,
                      "JSON config (overrides flags)");

    auto* tune = app.add_subcommand("tune-gamma",
                                    "Grid-search the L1 weight on a held-out "
                                    "realization");
    tune->add_option("--dataset", o.dataset, "A, B, C or D");
    tune->add_option("--blocks", o.blocks, "Custom block sizes")
        ->delimiter(',');
    add_model_flags(tune, o);
    tune->add_option("--k", o.k, "Steps per realization");
    tune->add_option("--realizations", o.realizations,
                     "Evaluation realizations (the held-out one comes after)");
    tune->add_option("--seed", o.seed, "Base seed")
        ->each([&o](const std::string&) { o.seed_given = true; });
    tune->add_option("--gamma-grid", o.gamma_grid, "Gamma grid")
        ->delimiter(',');
    add_fit_flags(tune, o);
    tune->add_option("--out-dir", o.out_dir, "Output directory");
    tune->add_option("--config", o.config_path,
                     "JSON config (overrides flags)");

    auto* exportg = app.add_subcommand("export-graph",
                                       "Convert a weight matrix CSV to DOT");
    exportg->add_option("--input", o.input, "Matrix CSV")->required();
    exportg->add_option("--out", o.out, "DOT output path")->required();
    exportg->add_option("--threshold", o.threshold, "Edge threshold");
    exportg->add_option("--config", o.config_path,
                        "JSON config (overrides flags)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }

    try {
        apply_config(o);
        if (sim->parsed()) return cmd_simulate(o);
        if (fit->parsed()) return cmd_fit(o);
        if (bench->parsed()) return cmd_benchmark(o);
        if (tune->parsed()) return cmd_tune_gamma(o);
        if (exportg->parsed()) return cmd_export_graph(o);
    } catch (const graphem::ParseError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitData;
    } catch (const graphem::NumericError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitNumeric;
    } catch (const std::invalid_argument& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
