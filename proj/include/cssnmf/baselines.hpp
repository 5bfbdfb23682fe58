#pragma once

#include "cssnmf/matrix.hpp"
#include "cssnmf/postprocess.hpp"
#include "cssnmf/solver.hpp"

#include <vector>

namespace cssnmf {

/**
 * Successive projection algorithm: r times pick the residual column with the
 * largest l2 norm (ties to the smaller index) and project every column onto
 * its orthogonal complement. Returns the picks in extraction order.
 * Throws NumericalError("rank-deficient input") if the residual vanishes first.
 */
IndexList spa(const Matrix& M, int r);

struct SspaConfig {
    Index nplp = 1;  // proximal latent points aggregated per component
    AggregationRule aggregation = AggregationRule::Mean;
};

struct SspaResult {
    std::vector<IndexList> clusters;  // clusters[t][0] is the SPA pick of step t
    Matrix W;
};

/**
 * Smoothed SPA. Each step takes the SPA direction u, gathers that column and
 * the nplp - 1 other unused columns with the largest <u, R(:,j)>, aggregates
 * their original columns into W(:,t), and deflates the residual along the
 * aggregated residual direction. nplp = 1 reproduces spa exactly.
 */
SspaResult sspa(const Matrix& M, int r, const SspaConfig& cfg);

enum class NplpPolicy { Min, Mid, Mean };

/// min: p_min; mid: floor((p_min + mean p) / 2); mean: round(mean p).
Index nplp_for(const std::vector<Index>& class_sizes, NplpPolicy policy);

/// Trace-penalized self-dictionary solve followed by spa on the rows of X.
IndexList fgnsr_baseline(const Matrix& M, int r, const SolverConfig& solver);

/// Solver defaults for fgnsr_baseline: Trace penalty, controller steering tr(X) to r.
SolverConfig fgnsr_default_config(const Matrix& M, int r);

} // namespace cssnmf
