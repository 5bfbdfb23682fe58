#pragma once

#include "cssnmf/matrix.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace cssnmf {

// SquaredDiag: mu * ||diag(X)||_2^2 (convex smooth-separable model).
// Trace:       mu * sum_i X(i,i)    (classic self-dictionary model).
enum class PenaltyKind { SquaredDiag, Trace };

// Statistic steered by the mu controller. Diagonal uses tr(X); Residual uses ||M - MX||_F.
enum class MuStatistic { Diagonal, Residual };

struct MuControlConfig {
    MuStatistic statistic = MuStatistic::Diagonal;
    double target = 1.0;
    double sigma0 = 0.5;
    int adjust_every = 0;  // 0: adjust at restart points only
};

// Geometric decrease of mu toward final_mu, applied at restart points.
struct MuSchedule {
    double final_mu = 0.0;
    double decay = 0.5;
};

struct SolverConfig {
    double mu = 1.0;
    int maxiter = 1000;
    double alpha0 = 0.05;
    PenaltyKind penalty = PenaltyKind::SquaredDiag;
    int restart_period = 50;  // 0: never restart
    double lipschitz_safety = 1.0;
    std::optional<MuControlConfig> mu_control;
    std::optional<MuSchedule> mu_schedule;
    bool early_stop = true;  // ignored while mu is being adapted

    void validate() const;
};

struct SolverResult {
    Matrix X;
    std::vector<double> objective_trace;
    double final_mu = 0.0;
    int iterations_run = 0;
};

/// Called after every projected step with the 1-based iteration and the new iterate.
using IterateObserver = std::function<void(int, const Matrix&)>;

/**
 * Euclidean projection onto
 *   Omega = { X >= 0, X(i,i) <= 1, w_i X(i,j) <= w_j X(i,i) for all i, j }.
 *
 * Rows are independent. For row i with diagonal value t and slopes
 * c_j = w_j / w_i the cost in t is a convex piecewise quadratic whose
 * breakpoints are max(Y(i,j), 0) / c_j; the minimizer is found by a sorted
 * scan over the breakpoints and clamped to [0, 1].
 */
Matrix project_omega(const Matrix& Y, const Vector& w);

double objective(const Matrix& M, const Matrix& X, double mu, PenaltyKind penalty);

/// 2 M^T (M Y - M) plus the penalty gradient on the diagonal.
Matrix gradient(const Matrix& M, const Matrix& Y, double mu, PenaltyKind penalty);

struct MuUpdate {
    double mu;
    double sigma;
    int direction;  // +1 increase, -1 decrease, 0 none yet
};

/**
 * One multiplicative step of the mu controller.
 *
 * By default the statistic is assumed to decrease as mu grows (trace or
 * diagonal norm), so observed > target raises mu. Pass
 * increasing_in_mu = true for statistics like the residual norm. When the
 * chosen direction reverses last_direction, sigma is halved before the
 * step is applied.
 */
MuUpdate adapt_mu(double current_mu, double sigma, double observed, double target,
                  int last_direction, bool increasing_in_mu = false);

/// Nesterov fast gradient method on min_{X in Omega} ||M - MX||_F^2 + mu P(X).
SolverResult fgm_solve(const Matrix& M, const SolverConfig& config,
                       const IterateObserver& observer = {});

} // namespace cssnmf
