#pragma once

#include "cssnmf/postprocess.hpp"
#include "cssnmf/solver.hpp"
#include "cssnmf/synthgen.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace cssnmf {

enum class Method { Cssnmf, CssnmfMean, CssnmfMedian, Spa, SspaMin, SspaMid, SspaMean, Fgnsr };

std::string method_name(Method m);
Method parse_method(const std::string& name);
std::vector<Method> default_methods();

/**
 * Solver knobs expressed relative to the data, resolved per matrix by build().
 *
 * mu = nullopt means "auto": the initial value is mu_factor * ||M||_F^2 / n and
 * the diagonal controller steers tr(X) to target_trace (default r/2 + 1).
 * A numeric mu is used as is. Setting mu_final_factor switches to a
 * geometric schedule toward mu_final_factor * ||M||_F^2 / n instead of the
 * controller.
 */
struct SolverSettings {
    int maxiter = 1000;
    int restart_period = 50;
    double alpha0 = 0.05;
    std::optional<double> mu;
    double mu_factor = 0.1;
    std::optional<double> target_trace;
    double sigma0 = 0.5;
    std::optional<double> mu_final_factor;
    double mu_decay = 0.5;

    SolverConfig build(const Matrix& M, int r) const;
    SolverConfig build_fgnsr(const Matrix& M, int r) const;
};

struct ExperimentConfig {
    std::string scenario = "dirichlet";  // dirichlet, midpoints, outliers, file
    int trials = 20;
    std::uint64_t seed = 1;
    std::vector<double> levels;  // noise levels, or outlier counts; empty: scenario default
    std::vector<Method> methods = default_methods();
    SolverSettings solver;
    // p = 0 selects the number of pure columns of each instance.
    std::variant<TopP, Threshold> selection = TopP{0};
    SelectionScore score = SelectionScore::RowL1;
    AggregationRule aggregation = AggregationRule::Mean;
    double dirichlet_alpha = 1.0;
    std::string input;  // file scenario: CSV or instance directory
    int r = 0;          // file scenario only; synthetic scenarios know their rank
    std::filesystem::path output_dir = "experiment_out";

    void validate() const;
    std::vector<double> resolved_levels() const;
};

/// Keys follow the field names; unknown keys are rejected.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg);
SolverSettings solver_settings_from_json(const nlohmann::json& j, SolverSettings base = {});

struct MetricsRow {
    std::string scenario;
    double level = 0.0;
    int trial = 0;
    std::uint64_t seed = 0;
    std::string method;
    double accuracy = 0.0;
    double d_w = 0.0;
    double rel_error = 0.0;
    std::string error;  // empty on success
    double runtime_ms = 0.0;
};

struct AggregateRow {
    std::string scenario;
    double level = 0.0;
    std::string method;
    int trials_ok = 0;
    double accuracy = 0.0;
    double d_w = 0.0;
    double rel_error = 0.0;
};

struct SweepReport {
    std::vector<MetricsRow> rows;       // level-major, then trial, then method
    std::vector<AggregateRow> means;    // level-major, then method
    std::vector<AggregateRow> best;     // outliers only: best over trials
};

/// Seed of the instance for (trial, level index). Outlier instances ignore the level.
std::uint64_t instance_seed(const ExperimentConfig& cfg, int trial, int level_idx);

/// Builds the instance for one grid point.
SyntheticInstance make_instance(const ExperimentConfig& cfg, double level, std::uint64_t seed);

/// Runs every method on one instance; rows come back in cfg.methods order.
std::vector<MetricsRow> run_methods(const ExperimentConfig& cfg, const SyntheticInstance& inst, double level,
                                    int trial);

/// Worker count from CSSNMF_THREADS (unset or 0: all cores).
int worker_count();

/// Calls fn(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

SweepReport run_experiment(const ExperimentConfig& cfg, int threads = worker_count());

/// raw.csv, aggregates.csv, best.csv (outliers), plotdata/<metric>.csv, timing.json, config.json.
void write_report(const std::filesystem::path& dir, const ExperimentConfig& cfg, const SweepReport& report);

} // namespace cssnmf
