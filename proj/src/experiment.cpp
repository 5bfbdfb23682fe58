#include "cssnmf/experiment.hpp"

#include "cssnmf/baselines.hpp"
#include "cssnmf/csv.hpp"
#include "cssnmf/error.hpp"
#include "cssnmf/io.hpp"
#include "cssnmf/metrics.hpp"
#include "cssnmf/rng.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace cssnmf {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::vector<std::pair<Method, const char*>>& method_table() {
    static const std::vector<std::pair<Method, const char*>> table{
        {Method::Cssnmf, "cssnmf"},        {Method::CssnmfMean, "cssnmf-mean"}, {Method::CssnmfMedian, "cssnmf-median"},
        {Method::Spa, "spa"},              {Method::SspaMin, "sspa_min"},       {Method::SspaMid, "sspa_mid"},
        {Method::SspaMean, "sspa_mean"},   {Method::Fgnsr, "fgnsr"},
    };
    return table;
}

double mu_unit(const Matrix& M) { return M.squaredNorm() / static_cast<double>(std::max<Index>(M.cols(), 1)); }

AggregationRule parse_aggregation(const std::string& s) {
    if (s == "mean") return AggregationRule::Mean;
    if (s == "median") return AggregationRule::Median;
    throw InvalidArgument("unknown aggregation '" + s + "' (expected mean or median)");
}

std::string aggregation_name(AggregationRule a) { return a == AggregationRule::Mean ? "mean" : "median"; }

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw InvalidArgument(where + ": expected a JSON object");
    for (const auto& item : j.items()) {
        if (!allowed.count(item.key())) throw InvalidArgument(where + ": unknown key '" + item.key() + "'");
    }
}

std::string sanitize(std::string s) {
    for (char& c : s) {
        if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ' ';
    }
    return s;
}

std::string error_tag(const std::exception_ptr& ep) {
    try {
        std::rethrow_exception(ep);
    } catch (const InvalidArgument& e) {
        return "invalid: " + sanitize(e.what());
    } catch (const DataError& e) {
        return "data: " + sanitize(e.what());
    } catch (const NumericalError& e) {
        return "numerical: " + sanitize(e.what());
    } catch (const std::exception& e) {
        return "error: " + sanitize(e.what());
    }
}

Matrix columns_of(const Matrix& M, const IndexList& K) {
    Matrix W(M.rows(), static_cast<Index>(K.size()));
    for (size_t i = 0; i < K.size(); ++i) W.col(static_cast<Index>(i)) = M.col(K[i]);
    return W;
}

SelectionRule resolve_selection(const ExperimentConfig& cfg, const SyntheticInstance& inst, int r) {
    SelectionRule rule;
    rule.score = cfg.score;
    if (const auto* top = std::get_if<TopP>(&cfg.selection)) {
        Index p = top->p;
        if (p == 0) p = static_cast<Index>(inst.pure_columns.size());
        if (p == 0) throw InvalidArgument("selection: top_p needs p when the instance has no ground truth");
        rule.rule = TopP{p};
    } else {
        Threshold t = std::get<Threshold>(cfg.selection);
        if (t.min_count == 0) t.min_count = r;
        rule.rule = t;
    }
    return rule;
}

} // namespace

std::string method_name(Method m) {
    for (const auto& [k, name] : method_table())
        if (k == m) return name;
    return "unknown";
}

Method parse_method(const std::string& name) {
    for (const auto& [k, n] : method_table())
        if (name == n) return k;
    throw InvalidArgument("unknown method '" + name + "'");
}

std::vector<Method> default_methods() {
    return {Method::Cssnmf, Method::Spa, Method::SspaMin, Method::SspaMid, Method::SspaMean, Method::Fgnsr};
}

SolverConfig SolverSettings::build(const Matrix& M, int r) const {
    SolverConfig cfg;
    cfg.maxiter = maxiter;
    cfg.restart_period = restart_period;
    cfg.alpha0 = alpha0;
    cfg.penalty = PenaltyKind::SquaredDiag;
    const double unit = mu_unit(M);
    cfg.mu = mu ? *mu : mu_factor * unit;
    if (mu_final_factor) {
        cfg.mu_schedule = MuSchedule{*mu_final_factor * unit, mu_decay};
    } else if (!mu) {
        const double tau = target_trace ? *target_trace : r / 2.0 + 1.0;
        cfg.mu_control = MuControlConfig{MuStatistic::Diagonal, tau, sigma0, 0};
    }
    cfg.validate();
    return cfg;
}

SolverConfig SolverSettings::build_fgnsr(const Matrix& M, int r) const {
    SolverConfig cfg = fgnsr_default_config(M, r);
    cfg.maxiter = maxiter;
    cfg.restart_period = restart_period;
    cfg.alpha0 = alpha0;
    if (cfg.mu_control) cfg.mu_control->sigma0 = sigma0;
    cfg.validate();
    return cfg;
}

void ExperimentConfig::validate() const {
    static const std::set<std::string> scenarios{"dirichlet", "midpoints", "outliers", "file"};
    if (!scenarios.count(scenario)) throw InvalidArgument("unknown scenario '" + scenario + "'");
    if (trials < 1) throw InvalidArgument("trials must be at least 1");
    if (methods.empty()) throw InvalidArgument("methods must not be empty");
    if (scenario == "file") {
        if (input.empty()) throw InvalidArgument("file scenario needs 'input'");
    } else if (!input.empty()) {
        throw InvalidArgument("'input' is only used by the file scenario");
    }
    if (r < 0) throw InvalidArgument("r must be nonnegative");
    for (double level : levels) {
        if (!std::isfinite(level) || level < 0.0) throw InvalidArgument("levels must be finite and nonnegative");
        if (scenario == "outliers" && (level != std::floor(level) || level < 1 || level > 15))
            throw InvalidArgument("outlier levels must be integers in [1, 15]");
    }
    if (const auto* t = std::get_if<Threshold>(&selection)) {
        if (!(t->delta >= 0.0)) throw InvalidArgument("selection: delta must be nonnegative");
    }
}

std::vector<double> ExperimentConfig::resolved_levels() const {
    if (!levels.empty()) return levels;
    if (scenario == "dirichlet") return dirichlet_noise_grid();
    if (scenario == "midpoints") return midpoint_noise_grid();
    if (scenario == "outliers") {
        std::vector<double> out;
        for (int ell = 1; ell <= 15; ++ell) out.push_back(ell);
        return out;
    }
    return {0.0};
}

SolverSettings solver_settings_from_json(const json& j, SolverSettings s) {
    check_keys(j,
               {"maxiter", "restart_period", "alpha0", "mu", "mu_factor", "target_trace", "sigma0", "mu_final_factor",
                "mu_decay"},
               "solver");
    try {
        if (j.contains("maxiter")) s.maxiter = j["maxiter"].get<int>();
        if (j.contains("restart_period")) s.restart_period = j["restart_period"].get<int>();
        if (j.contains("alpha0")) s.alpha0 = j["alpha0"].get<double>();
        if (j.contains("mu")) {
            const auto& v = j["mu"];
            if (v.is_null() || (v.is_string() && v.get<std::string>() == "auto")) {
                s.mu.reset();
            } else if (v.is_number()) {
                s.mu = v.get<double>();
            } else {
                throw InvalidArgument("solver.mu must be a number or \"auto\"");
            }
        }
        if (j.contains("mu_factor")) s.mu_factor = j["mu_factor"].get<double>();
        if (j.contains("target_trace")) {
            if (j["target_trace"].is_null()) s.target_trace.reset();
            else s.target_trace = j["target_trace"].get<double>();
        }
        if (j.contains("sigma0")) s.sigma0 = j["sigma0"].get<double>();
        if (j.contains("mu_final_factor")) {
            if (j["mu_final_factor"].is_null()) s.mu_final_factor.reset();
            else s.mu_final_factor = j["mu_final_factor"].get<double>();
        }
        if (j.contains("mu_decay")) s.mu_decay = j["mu_decay"].get<double>();
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("solver: ") + e.what());
    }
    return s;
}

ExperimentConfig experiment_config_from_json(const json& j) {
    check_keys(j,
               {"scenario", "trials", "seed", "levels", "noise_grid", "outlier_grid", "methods", "solver", "selection",
                "score", "aggregation", "dirichlet_alpha", "input", "r", "output_dir"},
               "config");
    ExperimentConfig cfg;
    try {
        if (j.contains("scenario")) cfg.scenario = j["scenario"].get<std::string>();
        if (j.contains("trials")) cfg.trials = j["trials"].get<int>();
        if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
        for (const char* key : {"levels", "noise_grid", "outlier_grid"}) {
            if (j.contains(key)) cfg.levels = j[key].get<std::vector<double>>();
        }
        if (j.contains("methods")) {
            cfg.methods.clear();
            for (const auto& m : j["methods"]) cfg.methods.push_back(parse_method(m.get<std::string>()));
        }
        if (j.contains("solver")) cfg.solver = solver_settings_from_json(j["solver"]);
        if (j.contains("selection")) {
            const json& sel = j["selection"];
            check_keys(sel, {"rule", "p", "delta", "min_count"}, "selection");
            const std::string rule = sel.value("rule", std::string("top_p"));
            if (rule == "top_p") {
                cfg.selection = TopP{sel.contains("p") && !sel["p"].is_null() ? sel["p"].get<Index>() : 0};
            } else if (rule == "threshold") {
                cfg.selection = Threshold{sel.value("delta", 0.5), sel.value("min_count", Index{0})};
            } else {
                throw InvalidArgument("selection.rule must be top_p or threshold");
            }
        }
        if (j.contains("score")) {
            const std::string s = j["score"].get<std::string>();
            if (s == "row_l1") cfg.score = SelectionScore::RowL1;
            else if (s == "diagonal") cfg.score = SelectionScore::Diagonal;
            else throw InvalidArgument("score must be row_l1 or diagonal");
        }
        if (j.contains("aggregation")) cfg.aggregation = parse_aggregation(j["aggregation"].get<std::string>());
        if (j.contains("dirichlet_alpha")) cfg.dirichlet_alpha = j["dirichlet_alpha"].get<double>();
        if (j.contains("input")) cfg.input = j["input"].get<std::string>();
        if (j.contains("r")) cfg.r = j["r"].get<int>();
        if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

json experiment_config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["scenario"] = cfg.scenario;
    j["trials"] = cfg.trials;
    j["seed"] = cfg.seed;
    j["levels"] = cfg.resolved_levels();
    json methods = json::array();
    for (Method m : cfg.methods) methods.push_back(method_name(m));
    j["methods"] = methods;
    json s;
    s["maxiter"] = cfg.solver.maxiter;
    s["restart_period"] = cfg.solver.restart_period;
    s["alpha0"] = cfg.solver.alpha0;
    s["mu"] = cfg.solver.mu ? json(*cfg.solver.mu) : json("auto");
    s["mu_factor"] = cfg.solver.mu_factor;
    s["target_trace"] = cfg.solver.target_trace ? json(*cfg.solver.target_trace) : json(nullptr);
    s["sigma0"] = cfg.solver.sigma0;
    s["mu_final_factor"] = cfg.solver.mu_final_factor ? json(*cfg.solver.mu_final_factor) : json(nullptr);
    s["mu_decay"] = cfg.solver.mu_decay;
    j["solver"] = s;
    if (const auto* top = std::get_if<TopP>(&cfg.selection)) {
        j["selection"] = {{"rule", "top_p"}, {"p", top->p == 0 ? json(nullptr) : json(top->p)}};
    } else {
        const auto& t = std::get<Threshold>(cfg.selection);
        j["selection"] = {{"rule", "threshold"}, {"delta", t.delta}, {"min_count", t.min_count}};
    }
    j["score"] = cfg.score == SelectionScore::RowL1 ? "row_l1" : "diagonal";
    j["aggregation"] = aggregation_name(cfg.aggregation);
    j["dirichlet_alpha"] = cfg.dirichlet_alpha;
    if (cfg.scenario == "file") {
        j["input"] = cfg.input;
        j["r"] = cfg.r;
    }
    j["output_dir"] = cfg.output_dir.string();
    return j;
}

std::uint64_t instance_seed(const ExperimentConfig& cfg, int trial, int level_idx) {
    if (cfg.scenario == "outliers") return derive_seed(cfg.seed, static_cast<std::uint64_t>(trial));
    return derive_seed(cfg.seed, static_cast<std::uint64_t>(trial), static_cast<std::uint64_t>(level_idx));
}

SyntheticInstance make_instance(const ExperimentConfig& cfg, double level, std::uint64_t seed) {
    if (cfg.scenario == "dirichlet") return gen_dirichlet(seed, level, cfg.dirichlet_alpha);
    if (cfg.scenario == "midpoints") return gen_midpoints(seed, level);
    if (cfg.scenario == "outliers") return gen_outliers(seed, static_cast<int>(level));
    if (cfg.scenario == "file") {
        if (auto inst = load_instance_if_present(cfg.input)) {
            inst->seed = seed;
            return *inst;
        }
        SyntheticInstance inst;
        inst.scenario = "file";
        inst.seed = seed;
        inst.M = load_matrix_input(cfg.input);
        return inst;
    }
    throw InvalidArgument("unknown scenario '" + cfg.scenario + "'");
}

std::vector<MetricsRow> run_methods(const ExperimentConfig& cfg, const SyntheticInstance& inst, double level,
                                    int trial) {
    using clock = std::chrono::steady_clock;
    const Matrix& M = inst.M;
    const bool truth = inst.W_true.size() > 0;
    const int r = cfg.r > 0 ? cfg.r : inst.rank();

    std::optional<SolverResult> solved;
    std::exception_ptr solve_failure;
    double solve_ms = 0.0;

    std::vector<MetricsRow> rows;
    for (Method method : cfg.methods) {
        MetricsRow row;
        row.scenario = cfg.scenario;
        row.level = level;
        row.trial = trial;
        row.seed = inst.seed;
        row.method = method_name(method);
        const auto start = clock::now();
        double extra_ms = 0.0;
        try {
            if (r < 1) throw InvalidArgument("rank r is unknown; set r for the file scenario");
            Matrix W;
            Matrix H;
            switch (method) {
            case Method::Cssnmf:
            case Method::CssnmfMean:
            case Method::CssnmfMedian: {
                if (!solved && !solve_failure) {
                    const auto s0 = clock::now();
                    try {
                        solved = fgm_solve(M, cfg.solver.build(M, r));
                    } catch (...) {
                        solve_failure = std::current_exception();
                    }
                    solve_ms = std::chrono::duration<double, std::milli>(clock::now() - s0).count();
                } else {
                    extra_ms = solve_ms;  // the shared solve counts toward every variant
                }
                if (solve_failure) std::rethrow_exception(solve_failure);
                const AggregationRule agg = method == Method::CssnmfMean     ? AggregationRule::Mean
                                            : method == Method::CssnmfMedian ? AggregationRule::Median
                                                                             : cfg.aggregation;
                CssnmfSolution sol =
                    cssnmf_postprocess(M, solved->X, r, resolve_selection(cfg, inst, r), agg, inst.seed);
                W = std::move(sol.W);
                H = std::move(sol.H);
                break;
            }
            case Method::Spa:
                W = columns_of(M, spa(M, r));
                H = nnls_cd(M, W);
                break;
            case Method::SspaMin:
            case Method::SspaMid:
            case Method::SspaMean: {
                if (inst.pure_sets.empty()) throw InvalidArgument("sspa variants need known class sizes");
                const NplpPolicy policy = method == Method::SspaMin   ? NplpPolicy::Min
                                          : method == Method::SspaMid ? NplpPolicy::Mid
                                                                      : NplpPolicy::Mean;
                SspaConfig sc;
                sc.nplp = nplp_for(inst.class_sizes(), policy);
                sc.aggregation = AggregationRule::Mean;
                W = sspa(M, r, sc).W;
                H = nnls_cd(M, W);
                break;
            }
            case Method::Fgnsr:
                W = columns_of(M, fgnsr_baseline(M, r, cfg.solver.build_fgnsr(M, r)));
                H = nnls_cd(M, W);
                break;
            }
            row.accuracy = truth && !inst.pure_columns.empty() ? accuracy(H, inst.labels, inst.pure_columns) : kNaN;
            row.d_w = truth ? rel_w_error(W, inst.W_true) : kNaN;
            row.rel_error = rel_approx_error(M, W);
        } catch (...) {
            row.error = error_tag(std::current_exception());
            row.accuracy = row.d_w = row.rel_error = kNaN;
        }
        row.runtime_ms = std::chrono::duration<double, std::milli>(clock::now() - start).count() + extra_ms;
        rows.push_back(std::move(row));
    }
    return rows;
}

int worker_count() {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const char* env = std::getenv("CSSNMF_THREADS");
    if (env == nullptr || *env == '\0') return static_cast<int>(hw);
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 0) throw InvalidArgument("CSSNMF_THREADS must be a nonnegative integer");
    if (v == 0) return static_cast<int>(hw);
    return static_cast<int>(v);
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(threads, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

SweepReport run_experiment(const ExperimentConfig& cfg, int threads) {
    cfg.validate();
    const std::vector<double> levels = cfg.resolved_levels();
    const std::size_t nlevels = levels.size(), ntrials = static_cast<std::size_t>(cfg.trials);
    const std::size_t nmethods = cfg.methods.size();

    std::vector<std::vector<MetricsRow>> cells(nlevels * ntrials);
    parallel_for(cells.size(), threads, [&](std::size_t idx) {
        const int li = static_cast<int>(idx / ntrials), trial = static_cast<int>(idx % ntrials);
        const std::uint64_t seed = instance_seed(cfg, trial, li);
        try {
            const SyntheticInstance inst = make_instance(cfg, levels[static_cast<size_t>(li)], seed);
            cells[idx] = run_methods(cfg, inst, levels[static_cast<size_t>(li)], trial);
        } catch (...) {
            const std::string tag = error_tag(std::current_exception());
            for (Method m : cfg.methods) {
                cells[idx].push_back(
                    {cfg.scenario, levels[static_cast<size_t>(li)], trial, seed, method_name(m), kNaN, kNaN, kNaN, tag, 0.0});
            }
        }
    });

    SweepReport report;
    for (auto& cell : cells)
        for (auto& row : cell) report.rows.push_back(std::move(row));

    const bool want_best = cfg.scenario == "outliers";
    for (std::size_t li = 0; li < nlevels; ++li) {
        for (std::size_t mi = 0; mi < nmethods; ++mi) {
            AggregateRow mean{cfg.scenario, levels[li], method_name(cfg.methods[mi]), 0, 0.0, 0.0, 0.0};
            AggregateRow best{cfg.scenario, levels[li], mean.method, 0, kNaN, kNaN, kNaN};
            for (std::size_t t = 0; t < ntrials; ++t) {
                const MetricsRow& row = report.rows[(li * ntrials + t) * nmethods + mi];
                if (!row.error.empty()) continue;
                ++mean.trials_ok;
                mean.accuracy += row.accuracy;
                mean.d_w += row.d_w;
                mean.rel_error += row.rel_error;
                // fmax/fmin ignore the NaN seeds of `best`.
                best.accuracy = std::fmax(best.accuracy, row.accuracy);
                best.d_w = std::fmin(best.d_w, row.d_w);
                best.rel_error = std::fmin(best.rel_error, row.rel_error);
            }
            best.trials_ok = mean.trials_ok;
            if (mean.trials_ok > 0) {
                mean.accuracy /= mean.trials_ok;
                mean.d_w /= mean.trials_ok;
                mean.rel_error /= mean.trials_ok;
            } else {
                mean.accuracy = mean.d_w = mean.rel_error = kNaN;
            }
            report.means.push_back(mean);
            if (want_best) report.best.push_back(best);
        }
    }
    return report;
}

namespace {

std::string aggregate_csv(const std::vector<AggregateRow>& rows) {
    std::ostringstream ss;
    ss << "scenario,level,method,trials_ok,accuracy,d_w,rel_error\n";
    for (const auto& a : rows) {
        ss << a.scenario << ',' << format_double(a.level) << ',' << a.method << ',' << a.trials_ok << ','
           << format_double(a.accuracy) << ',' << format_double(a.d_w) << ',' << format_double(a.rel_error) << '\n';
    }
    return ss.str();
}

void write_plotdata(const std::filesystem::path& dir, const std::string& prefix, const ExperimentConfig& cfg,
                    const std::vector<AggregateRow>& rows) {
    const std::vector<std::pair<std::string, double AggregateRow::*>> metrics{
        {"accuracy", &AggregateRow::accuracy}, {"d_w", &AggregateRow::d_w}, {"rel_error", &AggregateRow::rel_error}};
    const std::size_t nm = cfg.methods.size();
    for (const auto& [name, field] : metrics) {
        std::ostringstream ss;
        ss << "level";
        for (Method m : cfg.methods) ss << ',' << method_name(m);
        ss << '\n';
        for (std::size_t i = 0; i < rows.size(); i += nm) {
            ss << format_double(rows[i].level);
            for (std::size_t k = 0; k < nm; ++k) ss << ',' << format_double(rows[i + k].*field);
            ss << '\n';
        }
        write_text_file(dir / "plotdata" / (prefix + name + ".csv"), ss.str());
    }
}

} // namespace

void write_report(const std::filesystem::path& dir, const ExperimentConfig& cfg, const SweepReport& report) {
    std::filesystem::create_directories(dir / "plotdata");

    std::ostringstream raw;
    raw << "scenario,level,trial,seed,method,accuracy,d_w,rel_error,status\n";
    for (const auto& r : report.rows) {
        raw << r.scenario << ',' << format_double(r.level) << ',' << r.trial << ',' << r.seed << ',' << r.method << ','
            << format_double(r.accuracy) << ',' << format_double(r.d_w) << ',' << format_double(r.rel_error) << ','
            << (r.error.empty() ? std::string("ok") : r.error) << '\n';
    }
    write_text_file(dir / "raw.csv", raw.str());
    write_text_file(dir / "aggregates.csv", aggregate_csv(report.means));
    write_plotdata(dir, "", cfg, report.means);
    if (!report.best.empty()) {
        write_text_file(dir / "best.csv", aggregate_csv(report.best));
        write_plotdata(dir, "best_", cfg, report.best);
    }

    json timing = json::array();
    for (const auto& r : report.rows) {
        timing.push_back({{"level", r.level}, {"trial", r.trial}, {"method", r.method}, {"runtime_ms", r.runtime_ms}});
    }
    write_text_file(dir / "timing.json", timing.dump(1) + "\n");
    json saved = experiment_config_to_json(cfg);
    saved.erase("output_dir");  // keeps reruns into different directories byte-identical
    write_text_file(dir / "config.json", saved.dump(2) + "\n");
}

} // namespace cssnmf
