#include "cssnmf/solver.hpp"

#include "cssnmf/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace cssnmf {

void SolverConfig::validate() const {
    if (!(mu >= 0.0) || !std::isfinite(mu)) throw InvalidArgument("solver: mu must be a finite nonnegative number");
    if (maxiter < 1) throw InvalidArgument("solver: maxiter must be at least 1");
    if (!(alpha0 > 0.0 && alpha0 < 1.0)) throw InvalidArgument("solver: alpha0 must lie in (0, 1)");
    if (restart_period < 0) throw InvalidArgument("solver: restart_period must be nonnegative");
    if (!(lipschitz_safety >= 1.0)) throw InvalidArgument("solver: lipschitz_safety must be >= 1");
    if (mu_control && mu_schedule) throw InvalidArgument("solver: mu_control and mu_schedule are exclusive");
    if (mu_control) {
        if (!(mu_control->target > 0.0)) throw InvalidArgument("solver: mu control target must be positive");
        if (!(mu_control->sigma0 > 0.0)) throw InvalidArgument("solver: mu control sigma0 must be positive");
        if (mu_control->adjust_every < 0) throw InvalidArgument("solver: adjust_every must be nonnegative");
        if (mu_control->adjust_every == 0 && restart_period == 0)
            throw InvalidArgument("solver: mu control at restarts needs restart_period > 0");
        if (!(mu > 0.0)) throw InvalidArgument("solver: mu control needs a positive initial mu");
    }
    if (mu_schedule) {
        if (!(mu_schedule->final_mu > 0.0)) throw InvalidArgument("solver: schedule final_mu must be positive");
        if (!(mu_schedule->decay > 0.0 && mu_schedule->decay < 1.0))
            throw InvalidArgument("solver: schedule decay must lie in (0, 1)");
        if (restart_period == 0) throw InvalidArgument("solver: mu schedule needs restart_period > 0");
    }
}

namespace {

struct Breakpoint {
    double at;     // value of t where the entry stops being clipped
    double slope;  // c_j
    double value;  // Y(i,j) > 0
};

void project_row(const Matrix& Y, Index i, const Vector& w, Matrix& X, std::vector<Breakpoint>& bps,
                 std::vector<double>& suffix_a, std::vector<double>& suffix_b) {
    const Index n = Y.cols();
    bps.clear();
    for (Index j = 0; j < n; ++j) {
        if (j == i) continue;
        const double y = Y(i, j);
        if (y > 0.0) {
            const double c = w(j) / w(i);
            bps.push_back({y / c, c, y});
        }
    }
    std::sort(bps.begin(), bps.end(), [](const Breakpoint& a, const Breakpoint& b) { return a.at < b.at; });

    const std::size_t k = bps.size();
    suffix_a.assign(k + 1, 0.0);
    suffix_b.assign(k + 1, 0.0);
    for (std::size_t s = k; s-- > 0;) {
        suffix_a[s] = suffix_a[s + 1] + bps[s].slope * bps[s].value;
        suffix_b[s] = suffix_b[s + 1] + bps[s].slope * bps[s].slope;
    }

    // Segment s spans [bps[s-1].at, bps[s].at]; entries s..k-1 are still clipped there.
    const double yii = Y(i, i);
    double t = yii;
    for (std::size_t s = 0; s <= k; ++s) {
        const double candidate = (yii + suffix_a[s]) / (1.0 + suffix_b[s]);
        const double upper = s < k ? bps[s].at : std::numeric_limits<double>::infinity();
        if (candidate <= upper) {
            t = candidate;
            break;
        }
    }
    t = std::clamp(t, 0.0, 1.0);

    for (Index j = 0; j < n; ++j) {
        if (j == i) {
            X(i, i) = t;
        } else {
            const double cap = (w(j) / w(i)) * t;
            X(i, j) = std::clamp(Y(i, j), 0.0, cap);
        }
    }
}

double penalty_value(const Matrix& X, PenaltyKind penalty) {
    const auto d = X.diagonal();
    return penalty == PenaltyKind::SquaredDiag ? d.squaredNorm() : d.sum();
}

} // namespace

Matrix project_omega(const Matrix& Y, const Vector& w) {
    if (Y.rows() != Y.cols()) throw InvalidArgument("project_omega: Y must be square");
    if (w.size() != Y.cols()) throw InvalidArgument("project_omega: weight length mismatch");
    for (Index j = 0; j < w.size(); ++j) {
        if (!(w(j) > 0.0)) throw InvalidArgument("project_omega: weights must be positive");
    }
    Matrix X(Y.rows(), Y.cols());
    std::vector<Breakpoint> bps;
    std::vector<double> sa;
    std::vector<double> sb;
    for (Index i = 0; i < Y.rows(); ++i) project_row(Y, i, w, X, bps, sa, sb);
    return X;
}

double objective(const Matrix& M, const Matrix& X, double mu, PenaltyKind penalty) {
    if (X.rows() != M.cols() || X.cols() != M.cols()) throw InvalidArgument("objective: X must be n x n");
    const Matrix R = M - M * X;
    return R.squaredNorm() + mu * penalty_value(X, penalty);
}

Matrix gradient(const Matrix& M, const Matrix& Y, double mu, PenaltyKind penalty) {
    if (Y.rows() != M.cols() || Y.cols() != M.cols()) throw InvalidArgument("gradient: Y must be n x n");
    Matrix G = 2.0 * (M.transpose() * (M * Y - M));
    if (penalty == PenaltyKind::SquaredDiag) {
        G.diagonal() += 2.0 * mu * Y.diagonal();
    } else {
        G.diagonal().array() += mu;
    }
    return G;
}

MuUpdate adapt_mu(double current_mu, double sigma, double observed, double target, int last_direction,
                  bool increasing_in_mu) {
    if (!(current_mu > 0.0) || !(sigma > 0.0)) throw InvalidArgument("adapt_mu: mu and sigma must be positive");
    if (observed == target) return {current_mu, sigma, last_direction};
    const bool above = observed > target;
    const int direction = (above != increasing_in_mu) ? 1 : -1;
    if (last_direction != 0 && direction != last_direction) sigma *= 0.5;
    const double mu = current_mu * (1.0 + direction * sigma);
    return {mu, sigma, direction};
}

namespace {

double next_alpha(double a) {
    const double a2 = a * a;
    return (-a2 + std::sqrt(a2 * a2 + 4.0 * a2)) / 2.0;
}

SolverResult solve_positive_weights(const Matrix& M, const SolverConfig& cfg, const IterateObserver& observer) {
    const Index n = M.cols();
    const Vector w = col_l1_norms(M);

    const auto sn = spectral_norm_sq(M, 1e-10, 5000);
    // An unconverged Rayleigh quotient may underestimate; fall back to ||M||_F^2 which always bounds it.
    const double sigma_sq = sn.converged ? sn.value * (1.0 + 1e-10) : M.squaredNorm();
    double mu = cfg.mu;
    auto lipschitz = [&](double m) { return cfg.lipschitz_safety * (2.0 * sigma_sq + 2.0 * m); };
    double L = lipschitz(mu);
    if (!(L > 0.0)) throw NumericalError("fgm_solve: Lipschitz constant is zero");

    Matrix X = Matrix::Zero(n, n);
    Matrix Y = X;
    Matrix MX = Matrix::Zero(M.rows(), n);
    Matrix MY = MX;
    double alpha = cfg.alpha0;

    double sigma = cfg.mu_control ? cfg.mu_control->sigma0 : 0.0;
    int last_direction = 0;
    const bool adapting = cfg.mu_control.has_value() || cfg.mu_schedule.has_value();

    SolverResult out;
    out.objective_trace.reserve(static_cast<size_t>(cfg.maxiter));
    int quiet = 0;

    auto adjust = [&]() {
        if (cfg.mu_control) {
            const auto& mc = *cfg.mu_control;
            double observed = 0.0;
            bool increasing = false;
            if (mc.statistic == MuStatistic::Diagonal) {
                observed = X.trace();
            } else {
                observed = (M - MX).norm();
                increasing = true;
            }
            const auto upd = adapt_mu(mu, sigma, observed, mc.target, last_direction, increasing);
            mu = upd.mu;
            sigma = upd.sigma;
            last_direction = upd.direction;
        } else if (cfg.mu_schedule) {
            mu = std::max(cfg.mu_schedule->final_mu, mu * cfg.mu_schedule->decay);
        }
        L = lipschitz(mu);
    };

    for (int k = 1; k <= cfg.maxiter; ++k) {
        Matrix G = 2.0 * (M.transpose() * (MY - M));
        if (cfg.penalty == PenaltyKind::SquaredDiag) {
            G.diagonal() += 2.0 * mu * Y.diagonal();
        } else {
            G.diagonal().array() += mu;
        }

        Matrix Xprev = std::move(X);
        Matrix MXprev = std::move(MX);
        X = project_omega(Y - G / L, w);
        MX = M * X;

        const double fval = (M - MX).squaredNorm() + mu * penalty_value(X, cfg.penalty);
        out.objective_trace.push_back(fval);
        out.iterations_run = k;
        if (observer) observer(k, X);

        const double a_next = next_alpha(alpha);
        const double beta = alpha * (1.0 - alpha) / (alpha * alpha + a_next);
        alpha = a_next;
        Y = X + beta * (X - Xprev);
        MY = MX + beta * (MX - MXprev);

        bool restarted = false;
        if (cfg.restart_period > 0 && k % cfg.restart_period == 0) {
            Y = X;
            MY = MX;
            alpha = cfg.alpha0;
            restarted = true;
        }
        if (cfg.mu_control && cfg.mu_control->adjust_every > 0) {
            if (k % cfg.mu_control->adjust_every == 0) adjust();
        } else if (adapting && restarted) {
            adjust();
        }

        if (cfg.early_stop && !adapting) {
            const double step = (X - Xprev).norm();
            quiet = step <= 1e-9 * (1.0 + X.norm()) ? quiet + 1 : 0;
            if (quiet >= 5) break;
        }
    }
    out.X = std::move(X);
    out.final_mu = mu;
    return out;
}

} // namespace

SolverResult fgm_solve(const Matrix& M, const SolverConfig& config, const IterateObserver& observer) {
    config.validate();
    if (M.cols() < 2) throw InvalidArgument("fgm_solve: M needs at least two columns");
    require_finite(M, "fgm_solve");

    const Vector w = col_l1_norms(M);
    IndexList kept;
    for (Index j = 0; j < M.cols(); ++j)
        if (w(j) > 0.0) kept.push_back(j);
    if (kept.empty()) throw NumericalError("fgm_solve: Lipschitz constant is zero (M = 0)");
    if (static_cast<Index>(kept.size()) == M.cols()) return solve_positive_weights(M, config, observer);

    // All-zero columns carry no weight in Omega; solve without them and reinsert zero rows/cols.
    const Index n = M.cols();
    const Index nk = static_cast<Index>(kept.size());
    Matrix Mk(M.rows(), nk);
    for (Index c = 0; c < nk; ++c) Mk.col(c) = M.col(kept[c]);
    auto expand = [&](const Matrix& Xk) {
        Matrix X = Matrix::Zero(n, n);
        for (Index a = 0; a < nk; ++a)
            for (Index b = 0; b < nk; ++b) X(kept[a], kept[b]) = Xk(a, b);
        return X;
    };
    IterateObserver inner;
    if (observer) inner = [&](int k, const Matrix& Xk) { observer(k, expand(Xk)); };
    if (nk < 2) {
        // a single nonzero column: its own diagonal is the only free variable
        SolverResult single;
        Matrix Xk = Matrix::Zero(1, 1);
        const double q = Mk.squaredNorm();
        const double mu = config.mu;
        Xk(0, 0) = config.penalty == PenaltyKind::SquaredDiag ? q / (q + mu) : std::clamp(1.0 - mu / (2.0 * q), 0.0, 1.0);
        single.X = expand(Xk);
        single.objective_trace.push_back(objective(M, single.X, mu, config.penalty));
        single.final_mu = mu;
        single.iterations_run = 1;
        return single;
    }
    SolverResult res = solve_positive_weights(Mk, config, inner);
    res.X = expand(res.X);
    return res;
}

} // namespace cssnmf
