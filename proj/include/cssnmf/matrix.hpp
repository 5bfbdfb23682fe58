#pragma once

#include <Eigen/Dense>

#include <string_view>
#include <vector>

namespace cssnmf {

// Column-major dense storage; column slices M.col(j) are contiguous.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using IndexList = std::vector<Index>;

/// Throws DataError naming `what` if any entry is NaN or infinite.
void require_finite(const Matrix& M, std::string_view what);

double frobenius_norm(const Matrix& M);

/// Entry j is sum_i |M(i,j)|.
Vector col_l1_norms(const Matrix& M);

/// max_j ||M(:,j)||_1; zero for an empty matrix.
double l1_operator_norm(const Matrix& M);

struct SpectralNormEstimate {
    double value = 0.0;   // Rayleigh quotient of the last iterate, estimates sigma_max^2
    int iterations = 0;
    bool converged = false;
};

/**
 * Power iteration on M^T M from the normalized all-ones vector.
 *
 * Stops once the relative change of the Rayleigh quotient drops below tol.
 * When max_iter is exhausted the last estimate is returned with
 * converged == false; callers decide whether to proceed.
 */
SpectralNormEstimate spectral_norm_sq(const Matrix& M, double tol = 1e-12, int max_iter = 10000);

struct SymEig {
    Vector values;   // ascending
    Matrix vectors;  // column k pairs with values(k)
};

/**
 * Cyclic Jacobi eigendecomposition of a small symmetric matrix.
 *
 * Sweeps until the off-diagonal Frobenius mass is below 1e-12 * ||S||_F.
 * Throws InvalidArgument if S is not square or not symmetric to 1e-12
 * relative, NumericalError if the sweeps do not converge.
 */
SymEig sym_eig(const Matrix& S);

} // namespace cssnmf
