#pragma once

#include "cssnmf/matrix.hpp"
#include "cssnmf/solver.hpp"

#include <cstdint>
#include <variant>
#include <vector>

namespace cssnmf {

// Row score used by select_rows. RowL1 is the default; Diagonal scores rows by X(j,j).
enum class SelectionScore { RowL1, Diagonal };

struct TopP {
    Index p = 1;
};

struct Threshold {
    double delta = 0.0;
    Index min_count = 1;  // fall back to the min_count best rows if fewer pass
};

struct SelectionRule {
    std::variant<TopP, Threshold> rule = TopP{};
    SelectionScore score = SelectionScore::RowL1;
};

enum class AggregationRule { Mean, Median };

struct CssnmfSolution {
    IndexList K;              // selected column indices, ascending
    std::vector<int> labels;  // cluster of K[i], in {0, ..., r-1}
    Matrix W;                 // m x r
    Matrix H;                 // r x n, nonnegative
    double residual = 0.0;    // ||M - WH||_F
    SolverResult solver;
};

/// Row scores of X: l1 norms of rows, or the diagonal.
Vector row_scores(const Matrix& X, SelectionScore score);

/**
 * TopP keeps the p best-scoring rows (ties to the smaller index);
 * Threshold keeps rows scoring >= delta, widened to the min_count best rows
 * when too few pass. The result is sorted ascending.
 */
IndexList select_rows(const Matrix& X, const SelectionRule& rule);

struct SpectralClusterOptions {
    int restarts = 10;
    int max_iter = 100;
    bool self_loops = false;  // keep diag(S) in the affinity; off as in the original NJW
};

/**
 * Normalized-adjacency spectral clustering (Ng-Jordan-Weiss).
 *
 * S is first re-indexed canonically (degree descending, then the sorted row
 * values) so the seeded k-means++ draws do not depend on the input order;
 * labels are returned in the caller's order, numbered by first appearance.
 */
std::vector<int> spectral_cluster(const Matrix& S, int r, std::uint64_t seed,
                                  const SpectralClusterOptions& opts = {});

/// Column t of the result is the entrywise mean or median of M(:, K_t).
Matrix aggregate(const Matrix& M, const IndexList& K, const std::vector<int>& labels, int r,
                 AggregationRule rule);

struct NnlsResult {
    Matrix H;
    int sweeps = 0;
    bool converged = false;
};

/**
 * Cyclic coordinate descent for min_{H >= 0} ||M - WH||_F^2, started at H = 0.
 * Stops when the largest coordinate change of a sweep is <= tol.
 */
NnlsResult nnls_cd_detailed(const Matrix& M, const Matrix& W, double tol, int max_sweeps);
Matrix nnls_cd(const Matrix& M, const Matrix& W, double tol = 1e-10, int max_sweeps = 1000);

/// fgm_solve -> select_rows -> spectral_cluster -> aggregate -> nnls_cd.
CssnmfSolution cssnmf_pipeline(const Matrix& M, int r, const SelectionRule& rule, AggregationRule agg,
                               const SolverConfig& solver, std::uint64_t seed);

/// Post-processing alone, for callers that already hold a solver output.
CssnmfSolution cssnmf_postprocess(const Matrix& M, const Matrix& X, int r, const SelectionRule& rule,
                                  AggregationRule agg, std::uint64_t seed);

} // namespace cssnmf
