#include "cssnmf/baselines.hpp"

#include "cssnmf/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace cssnmf {

namespace {

Index argmax_norm(const Matrix& R) {
    Index best = 0;
    double bn = -1.0;
    for (Index j = 0; j < R.cols(); ++j) {
        const double v = R.col(j).squaredNorm();
        if (v > bn) {
            bn = v;
            best = j;
        }
    }
    return best;
}

void check_rank(const Matrix& R, Index j, double scale) {
    if (!(R.col(j).norm() >= 1e-12 * scale) || scale == 0.0) {
        throw NumericalError("rank-deficient input");
    }
}

void deflate(Matrix& R, const Vector& u) { R -= u * (u.transpose() * R); }

} // namespace

IndexList spa(const Matrix& M, int r) {
    if (r < 1 || r > M.cols()) throw InvalidArgument("spa: r must lie in [1, n]");
    require_finite(M, "spa");
    const double scale = M.norm();
    Matrix R = M;
    IndexList picks;
    for (int t = 0; t < r; ++t) {
        const Index j = argmax_norm(R);
        check_rank(R, j, scale);
        const Vector u = R.col(j) / R.col(j).norm();
        picks.push_back(j);
        deflate(R, u);
    }
    return picks;
}

SspaResult sspa(const Matrix& M, int r, const SspaConfig& cfg) {
    if (r < 1 || r > M.cols()) throw InvalidArgument("sspa: r must lie in [1, n]");
    if (cfg.nplp < 1 || cfg.nplp > M.cols()) throw InvalidArgument("sspa: nplp must lie in [1, n]");
    require_finite(M, "sspa");
    const Index n = M.cols();
    const double scale = M.norm();
    Matrix R = M;
    std::vector<bool> used(static_cast<size_t>(n), false);
    SspaResult out;
    out.W.resize(M.rows(), r);

    for (int t = 0; t < r; ++t) {
        const Index j = argmax_norm(R);
        check_rank(R, j, scale);
        const Vector u = R.col(j) / R.col(j).norm();

        IndexList cluster{j};
        IndexList rest;
        for (Index c = 0; c < n; ++c)
            if (c != j && !used[c]) rest.push_back(c);
        const Vector score = R.transpose() * u;
        std::stable_sort(rest.begin(), rest.end(), [&](Index a, Index b) { return score(a) > score(b); });
        for (Index c : rest) {
            if (static_cast<Index>(cluster.size()) >= cfg.nplp) break;
            cluster.push_back(c);
        }
        for (Index c : cluster) used[c] = true;

        const std::vector<int> one(cluster.size(), 0);
        out.W.col(t) = aggregate(M, cluster, one, 1, cfg.aggregation).col(0);
        Vector dir = aggregate(R, cluster, one, 1, cfg.aggregation).col(0);
        const double dn = dir.norm();
        if (!(dn >= 1e-12 * scale)) throw NumericalError("rank-deficient input");
        deflate(R, dir / dn);
        out.clusters.push_back(std::move(cluster));
    }
    return out;
}

Index nplp_for(const std::vector<Index>& class_sizes, NplpPolicy policy) {
    if (class_sizes.empty()) throw InvalidArgument("nplp_for: no classes");
    const Index pmin = *std::min_element(class_sizes.begin(), class_sizes.end());
    const double pbar = static_cast<double>(std::accumulate(class_sizes.begin(), class_sizes.end(), Index{0})) /
                        static_cast<double>(class_sizes.size());
    switch (policy) {
    case NplpPolicy::Min: return pmin;
    case NplpPolicy::Mid: return static_cast<Index>(std::floor((static_cast<double>(pmin) + pbar) / 2.0));
    case NplpPolicy::Mean: return static_cast<Index>(std::lround(pbar));
    }
    return pmin;
}

SolverConfig fgnsr_default_config(const Matrix& M, int r) {
    SolverConfig cfg;
    cfg.penalty = PenaltyKind::Trace;
    cfg.mu = 0.1 * M.squaredNorm() / static_cast<double>(std::max<Index>(M.cols(), 1));
    cfg.mu_control = MuControlConfig{MuStatistic::Diagonal, static_cast<double>(r), 0.5, 0};
    return cfg;
}

IndexList fgnsr_baseline(const Matrix& M, int r, const SolverConfig& solver) {
    if (solver.penalty != PenaltyKind::Trace) throw InvalidArgument("fgnsr_baseline: solver penalty must be Trace");
    if (r < 1 || r > M.cols()) throw InvalidArgument("fgnsr_baseline: r must lie in [1, n]");
    const SolverResult res = fgm_solve(M, solver);
    IndexList picks = spa(res.X.transpose(), r);
    std::sort(picks.begin(), picks.end());
    return picks;
}

} // namespace cssnmf
