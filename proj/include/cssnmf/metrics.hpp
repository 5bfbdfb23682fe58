#pragma once

#include "cssnmf/matrix.hpp"

#include <vector>

namespace cssnmf {

/**
 * Minimum-cost perfect assignment on a square cost matrix (Hungarian method,
 * O(n^3)). Returns col_of_row with col_of_row[i] the column matched to row i.
 */
std::vector<Index> min_cost_assignment(const Matrix& cost);

/// Clustering accuracy of argmax_t H_hat(t, j) over J0 under the best label permutation.
double accuracy(const Matrix& H_hat, const std::vector<int>& labels, const IndexList& J0);

/// min over permutations of ||W_hat P - W||_F / ||W||_F after l2-normalizing columns of both.
double rel_w_error(const Matrix& W_hat, const Matrix& W_true);

/// min_{P >= 0} ||M - W P||_F / ||M||_F with coordinate-descent NNLS (tol 1e-8, 500 sweeps).
double rel_approx_error(const Matrix& M, const Matrix& W);

/// min_{x >= 0} ||target - A x||_1 solved as a linear program by a dense primal simplex.
double nonneg_l1_regression(const Matrix& A, const Vector& target);

/// kappa(W) = min_k min_{x >= 0} ||W(:,k) - W(:,others) x||_1.
double kappa(const Matrix& W);

struct RobustnessCertificate {
    double kappa = 0.0;
    double beta = 0.0;
    double r_eff = 0.0;
    Index p_max = 0;
    double epsilon = 0.0;
    double delta = 0.0;
    double thm6_threshold = 0.0;
    double thm8_threshold = 0.0;
};

/**
 * Diagnostic quantities for an instance with known factors:
 *   beta  = max H(t, j) over j outside the pure sets,
 *   r_eff = sum_t 1 / p_t,
 *   delta = 4 eps (1 + kappa beta) / (kappa (1 - beta) (1 - eps)),
 *   thm6  = kappa (1 - beta) / (5 (p_max + 1) (1 + kappa beta)),
 *   thm8  = kappa (1 - beta) / (18 p_max^2 r_eff).
 * Throws InvalidArgument if beta >= 1 (that column belongs to a pure set) or eps >= 1.
 */
RobustnessCertificate certificate(const Matrix& W, const Matrix& H, const std::vector<IndexList>& pure_sets,
                                  double eps);
RobustnessCertificate certificate_with_kappa(double kappa_value, const Matrix& H,
                                             const std::vector<IndexList>& pure_sets, double eps);

/// {j : X(j,j) > (1 - delta) / p_max}
IndexList diagonal_set_thm6(const Matrix& X, const RobustnessCertificate& cert);
/// {j : X(j,j) > (1 - delta) / p_max - sqrt(delta r_eff)}
IndexList diagonal_set_thm8(const Matrix& X, const RobustnessCertificate& cert);

// Closed forms for min sum x_i^2 s.t. sum x_i >= alpha (and optionally x_j <= beta).
struct SumOfSquaresMin {
    Vector x;
    double value = 0.0;
};
SumOfSquaresMin min_sum_of_squares(Index p, double alpha);
/// Requires p > 1 and beta < alpha / p; the capped coordinate is index `capped`.
SumOfSquaresMin min_sum_of_squares_capped(Index p, double alpha, double beta, Index capped = 0);

} // namespace cssnmf
