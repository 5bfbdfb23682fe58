// cssnmf command-line front end: synth, solve, experiment, metrics.

#include "cssnmf/baselines.hpp"
#include "cssnmf/csv.hpp"
#include "cssnmf/error.hpp"
#include "cssnmf/experiment.hpp"
#include "cssnmf/io.hpp"
#include "cssnmf/metrics.hpp"
#include "cssnmf/postprocess.hpp"
#include "cssnmf/synthgen.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cssnmf;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

struct SynthArgs {
    std::string scenario;
    double eps = 0.0;
    int ell = 0;
    std::uint64_t seed = 0;
    double alpha = 1.0;
    std::string out;
};

struct SolveArgs {
    std::string input;
    int r = 0;
    std::string method = "cssnmf";
    Index p = 0;
    std::optional<double> delta;
    std::string agg = "mean";
    std::string score = "row_l1";
    std::string mu = "auto";
    std::optional<double> target_trace;
    int maxiter = 1000;
    int restart_period = 50;
    double alpha0 = 0.05;
    double mu_factor = 0.1;
    std::optional<double> mu_final_factor;
    double mu_decay = 0.5;
    double sigma0 = 0.5;
    Index nplp = 0;
    std::uint64_t seed = 0;
    bool save_x = false;
    std::string out;
};

struct ExperimentArgs {
    std::string config;
    std::optional<std::string> scenario;
    std::optional<int> trials;
    std::optional<std::uint64_t> seed;
    std::vector<double> levels;
    std::vector<std::string> methods;
    std::optional<std::string> input;
    std::optional<int> r;
    std::optional<int> maxiter;
    std::optional<int> restart_period;
    std::optional<double> mu_final_factor;
    std::optional<double> delta;
    std::optional<std::string> agg;
    std::optional<std::string> out;
};

struct MetricsArgs {
    std::string instance;
    std::string solution;
    std::string out;
};

std::string json_text(const json& j) { return j.dump(2) + "\n"; }

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

void write_matrix(const fs::path& path, const Matrix& M) {
    std::ostringstream ss;
    write_csv_matrix(ss, M);
    write_text_file(path, ss.str());
}

Matrix columns_of(const Matrix& M, const IndexList& K) {
    Matrix W(M.rows(), static_cast<Index>(K.size()));
    for (size_t i = 0; i < K.size(); ++i) W.col(static_cast<Index>(i)) = M.col(K[i]);
    return W;
}

int run_synth(const SynthArgs& a) {
    SyntheticInstance inst;
    if (a.scenario == "dirichlet") inst = gen_dirichlet(a.seed, a.eps, a.alpha);
    else if (a.scenario == "midpoints") inst = gen_midpoints(a.seed, a.eps);
    else if (a.scenario == "outliers") inst = gen_outliers(a.seed, a.ell);
    else throw InvalidArgument("unknown scenario '" + a.scenario + "'");
    write_instance(a.out, inst);
    std::cout << "wrote " << a.out << " (M " << inst.M.rows() << "x" << inst.M.cols() << ")\n";
    return 0;
}

int run_solve(const SolveArgs& a) {
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    const Matrix M = load_matrix_input(a.input);
    const auto truth = load_instance_if_present(a.input);
    if (a.r < 1 || a.r > M.cols()) throw InvalidArgument("--r must lie in [1, n]");

    SolverSettings settings;
    settings.maxiter = a.maxiter;
    settings.restart_period = a.restart_period;
    settings.alpha0 = a.alpha0;
    settings.mu_factor = a.mu_factor;
    settings.target_trace = a.target_trace;
    settings.sigma0 = a.sigma0;
    settings.mu_final_factor = a.mu_final_factor;
    settings.mu_decay = a.mu_decay;
    if (a.mu != "auto") {
        try {
            size_t used = 0;
            settings.mu = std::stod(a.mu, &used);
            if (used != a.mu.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw InvalidArgument("--mu must be a number or 'auto'");
        }
    }

    const Method method = parse_method(a.method);
    json summary;
    summary["method"] = a.method;
    summary["m"] = M.rows();
    summary["n"] = M.cols();
    summary["r"] = a.r;

    IndexList K;
    std::vector<int> labels;
    Matrix W, H;
    std::optional<Matrix> X;
    switch (method) {
    case Method::Cssnmf:
    case Method::CssnmfMean:
    case Method::CssnmfMedian: {
        if (a.p > 0 && a.delta) throw InvalidArgument("--p and --delta are exclusive");
        SelectionRule rule;
        rule.score = a.score == "diagonal" ? SelectionScore::Diagonal : SelectionScore::RowL1;
        if (a.delta) {
            rule.rule = Threshold{*a.delta, static_cast<Index>(a.r)};
        } else if (a.p > 0) {
            rule.rule = TopP{a.p};
        } else if (truth && !truth->pure_columns.empty()) {
            rule.rule = TopP{static_cast<Index>(truth->pure_columns.size())};
        } else {
            throw InvalidArgument("cssnmf needs --p or --delta");
        }
        AggregationRule agg = a.agg == "median" ? AggregationRule::Median : AggregationRule::Mean;
        if (method == Method::CssnmfMean) agg = AggregationRule::Mean;
        if (method == Method::CssnmfMedian) agg = AggregationRule::Median;
        const SolverConfig cfg = settings.build(M, a.r);
        summary["initial_mu"] = cfg.mu;
        const SolverResult res = fgm_solve(M, cfg);
        CssnmfSolution sol = cssnmf_postprocess(M, res.X, a.r, rule, agg, a.seed);
        K = sol.K;
        labels = sol.labels;
        W = sol.W;
        H = sol.H;
        X = res.X;
        summary["final_mu"] = res.final_mu;
        summary["trace"] = res.X.trace();
        summary["iterations"] = res.iterations_run;
        summary["objective"] = res.objective_trace.empty() ? json(nullptr) : json(res.objective_trace.back());
        const size_t tail = std::min<size_t>(10, res.objective_trace.size());
        summary["objective_tail"] =
            std::vector<double>(res.objective_trace.end() - static_cast<std::ptrdiff_t>(tail), res.objective_trace.end());
        break;
    }
    case Method::Spa:
        K = spa(M, a.r);
        break;
    case Method::SspaMin:
    case Method::SspaMid:
    case Method::SspaMean: {
        SspaConfig sc;
        if (a.nplp > 0) {
            sc.nplp = a.nplp;
        } else if (truth && !truth->pure_sets.empty()) {
            const NplpPolicy policy = method == Method::SspaMin   ? NplpPolicy::Min
                                      : method == Method::SspaMid ? NplpPolicy::Mid
                                                                  : NplpPolicy::Mean;
            sc.nplp = nplp_for(truth->class_sizes(), policy);
        } else {
            throw InvalidArgument("sspa needs --nplp when the input carries no class sizes");
        }
        const SspaResult res = sspa(M, a.r, sc);
        for (size_t t = 0; t < res.clusters.size(); ++t) {
            for (Index j : res.clusters[t]) {
                K.push_back(j);
                labels.push_back(static_cast<int>(t));
            }
        }
        W = res.W;
        summary["nplp"] = sc.nplp;
        break;
    }
    case Method::Fgnsr: {
        const SolverConfig cfg = settings.build_fgnsr(M, a.r);
        K = fgnsr_baseline(M, a.r, cfg);
        break;
    }
    }
    if (W.size() == 0) {
        // Single-column picks: W = M(:, K) and K[i] is its own class.
        W = columns_of(M, K);
        labels.clear();
        for (size_t i = 0; i < K.size(); ++i) labels.push_back(static_cast<int>(i));
    }
    if (H.size() == 0) H = nnls_cd(M, W);

    // K and labels are written in ascending column order.
    std::vector<size_t> order(K.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](size_t x, size_t y) { return K[x] < K[y]; });
    IndexList Ks;
    std::ostringstream lab;
    for (size_t i : order) {
        Ks.push_back(K[i]);
        lab << K[i] << ',' << labels[i] << '\n';
    }

    const fs::path out = a.out;
    fs::create_directories(out);
    write_index_list(out / "K.csv", Ks);
    write_text_file(out / "labels.csv", lab.str());
    write_matrix(out / "W.csv", W);
    write_matrix(out / "H.csv", H);
    if (a.save_x && X) write_matrix(out / "X.csv", *X);

    const double residual = (M - W * H).norm();
    summary["residual"] = residual;
    summary["rel_error"] = M.norm() > 0 ? residual / M.norm() : 0.0;
    summary["selected"] = Ks.size();
    summary["runtime_ms"] = std::chrono::duration<double, std::milli>(clock::now() - start).count();
    write_text_file(out / "summary.json", json_text(summary));
    std::cout << "selected " << Ks.size() << " columns, residual " << format_double(residual) << "\n";
    return 0;
}

int run_experiment_cmd(const ExperimentArgs& a) {
    json j = json::object();
    if (!a.config.empty()) {
        std::ifstream in(a.config);
        if (!in) throw DataError("cannot read config " + a.config);
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw InvalidArgument(a.config + ": " + e.what());
        }
    }
    if (a.scenario) j["scenario"] = *a.scenario;
    if (a.trials) j["trials"] = *a.trials;
    if (a.seed) j["seed"] = *a.seed;
    if (!a.levels.empty()) {
        j.erase("noise_grid");
        j.erase("outlier_grid");
        j["levels"] = a.levels;
    }
    if (!a.methods.empty()) j["methods"] = a.methods;
    if (a.input) j["input"] = *a.input;
    if (a.r) j["r"] = *a.r;
    if (a.maxiter) j["solver"]["maxiter"] = *a.maxiter;
    if (a.restart_period) j["solver"]["restart_period"] = *a.restart_period;
    if (a.mu_final_factor) j["solver"]["mu_final_factor"] = *a.mu_final_factor;
    if (a.delta) j["selection"] = {{"rule", "threshold"}, {"delta", *a.delta}};
    if (a.agg) j["aggregation"] = *a.agg;
    if (a.out) j["output_dir"] = *a.out;

    const ExperimentConfig cfg = experiment_config_from_json(j);
    const SweepReport report = run_experiment(cfg);
    write_report(cfg.output_dir, cfg, report);

    int failed = 0;
    for (const auto& row : report.rows) failed += !row.error.empty();
    std::cout << "scenario " << cfg.scenario << ": " << report.rows.size() << " runs, " << failed << " failed\n";
    for (const auto& m : report.means) {
        std::cout << "  level " << format_double(m.level) << "  " << m.method << "  acc " << format_double(m.accuracy)
                  << "  d_w " << format_double(m.d_w) << "\n";
    }
    std::cout << "results in " << cfg.output_dir.string() << "\n";
    return 0;
}

int run_metrics(const MetricsArgs& a) {
    const SyntheticInstance inst = read_instance(a.instance);
    const fs::path sol = a.solution;
    const Matrix W = read_csv_matrix(sol / "W.csv");
    if (W.rows() != inst.M.rows()) throw DataError("W.csv has a different row count than M");
    const Matrix H = fs::exists(sol / "H.csv") ? read_csv_matrix(sol / "H.csv") : nnls_cd(inst.M, W);
    if (H.rows() != W.cols() || H.cols() != inst.M.cols()) throw DataError("H.csv does not match W and M");

    json report;
    report["scenario"] = inst.scenario;
    report["seed"] = inst.seed;
    report["eps"] = inst.epsilon;
    report["method"] = nullptr;
    report["runtime_ms"] = nullptr;
    if (fs::exists(sol / "summary.json")) {
        std::ifstream in(sol / "summary.json");
        json s;
        try {
            in >> s;
        } catch (const json::exception& e) {
            throw DataError("summary.json: " + std::string(e.what()));
        }
        if (s.contains("method")) report["method"] = s["method"];
        if (s.contains("runtime_ms")) report["runtime_ms"] = s["runtime_ms"];
    }
    report["accuracy"] = finite_or_null(accuracy(H, inst.labels, inst.pure_columns));
    report["d_w"] = W.cols() == inst.W_true.cols() ? finite_or_null(rel_w_error(W, inst.W_true)) : json(nullptr);
    report["rel_error"] = rel_approx_error(inst.M, W);
    if (a.out.empty()) {
        std::cout << json_text(report);
    } else {
        write_text_file(a.out, json_text(report));
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Convex smooth-separable NMF: instance generation, solving and experiment sweeps"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* cmd_synth = app.add_subcommand("synth", "Generate a synthetic instance directory");
    cmd_synth->add_option("--scenario", synth.scenario, "dirichlet, midpoints or outliers")
        ->required()
        ->check(CLI::IsMember({"dirichlet", "midpoints", "outliers"}));
    cmd_synth->add_option("--eps", synth.eps, "Noise level (dirichlet, midpoints)");
    cmd_synth->add_option("--ell", synth.ell, "Number of outlier columns (outliers)");
    cmd_synth->add_option("--seed", synth.seed, "Random seed");
    cmd_synth->add_option("--alpha", synth.alpha, "Dirichlet concentration");
    cmd_synth->add_option("--out", synth.out, "Output directory")->required();

    SolveArgs solve;
    auto* cmd_solve = app.add_subcommand("solve", "Run CSSNMF or a baseline on a matrix");
    cmd_solve->add_option("--input", solve.input, "M.csv or an instance directory")->required();
    cmd_solve->add_option("--r", solve.r, "Factorization rank")->required();
    cmd_solve->add_option("--method", solve.method, "cssnmf, cssnmf-mean, cssnmf-median, spa, sspa_min, sspa_mid, "
                                                    "sspa_mean or fgnsr");
    cmd_solve->add_option("--p", solve.p, "Select the p best rows of X");
    cmd_solve->add_option("--delta", solve.delta, "Select rows of X scoring at least delta");
    cmd_solve->add_option("--agg", solve.agg, "Cluster aggregation")->check(CLI::IsMember({"mean", "median"}));
    cmd_solve->add_option("--score", solve.score, "Row score")->check(CLI::IsMember({"row_l1", "diagonal"}));
    cmd_solve->add_option("--mu", solve.mu, "Penalty weight, or 'auto' for the trace controller");
    cmd_solve->add_option("--target-trace", solve.target_trace, "Controller target for tr(X) (default r/2 + 1)");
    cmd_solve->add_option("--maxiter", solve.maxiter, "Iteration budget");
    cmd_solve->add_option("--restart-period", solve.restart_period, "Momentum restart period (0: never)");
    cmd_solve->add_option("--alpha0", solve.alpha0, "Initial momentum parameter");
    cmd_solve->add_option("--mu-factor", solve.mu_factor, "Initial mu in units of ||M||_F^2 / n");
    cmd_solve->add_option("--mu-final-factor", solve.mu_final_factor,
                          "Decay mu toward this many units of ||M||_F^2 / n instead of using the controller");
    cmd_solve->add_option("--mu-decay", solve.mu_decay, "Per-restart decay factor of the mu schedule");
    cmd_solve->add_option("--sigma0", solve.sigma0, "Initial controller step");
    cmd_solve->add_option("--nplp", solve.nplp, "Points aggregated per SSPA component");
    cmd_solve->add_option("--seed", solve.seed, "Spectral clustering seed");
    cmd_solve->add_flag("--save-x", solve.save_x, "Also write X.csv");
    cmd_solve->add_option("--out", solve.out, "Output directory")->required();

    ExperimentArgs exp;
    auto* cmd_exp = app.add_subcommand("experiment", "Sweep methods over a noise or outlier grid");
    cmd_exp->add_option("--config", exp.config, "JSON experiment configuration")->check(CLI::ExistingFile);
    cmd_exp->add_option("--scenario", exp.scenario, "dirichlet, midpoints, outliers or file");
    cmd_exp->add_option("--trials", exp.trials, "Trials per level");
    cmd_exp->add_option("--seed", exp.seed, "Base seed");
    cmd_exp->add_option("--levels", exp.levels, "Noise levels or outlier counts")->delimiter(',');
    cmd_exp->add_option("--methods", exp.methods, "Methods to run")->delimiter(',');
    cmd_exp->add_option("--input", exp.input, "Input for the file scenario");
    cmd_exp->add_option("--r", exp.r, "Rank for the file scenario");
    cmd_exp->add_option("--maxiter", exp.maxiter, "Solver iteration budget");
    cmd_exp->add_option("--restart-period", exp.restart_period, "Momentum restart period");
    cmd_exp->add_option("--mu-final-factor", exp.mu_final_factor, "Use a mu schedule toward this factor");
    cmd_exp->add_option("--delta", exp.delta, "Threshold selection instead of top-p");
    cmd_exp->add_option("--agg", exp.agg, "Aggregation for the cssnmf method");
    cmd_exp->add_option("--out", exp.out, "Output directory");

    MetricsArgs met;
    auto* cmd_met = app.add_subcommand("metrics", "Recompute metrics of a saved solution against its instance");
    cmd_met->add_option("--instance", met.instance, "Instance directory")->required()->check(CLI::ExistingDirectory);
    cmd_met->add_option("--solution", met.solution, "Solution directory")->required()->check(CLI::ExistingDirectory);
    cmd_met->add_option("--out", met.out, "Write the JSON report here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*cmd_synth) return run_synth(synth);
        if (*cmd_solve) return run_solve(solve);
        if (*cmd_exp) return run_experiment_cmd(exp);
        if (*cmd_met) return run_metrics(met);
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
