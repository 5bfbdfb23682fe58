#pragma once

#include "cssnmf/matrix.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cssnmf {

struct SyntheticInstance {
    Matrix M;                       // m x n, columns l1-normalized
    Matrix W_true;                  // m x r, as drawn
    Matrix H_true;                  // r x n, before column normalization of M
    IndexList pure_columns;         // J0
    std::vector<int> labels;        // class of pure_columns[i]
    std::vector<IndexList> pure_sets;  // S_t
    Vector col_scale;               // M = max(0, M0 + N) * diag(col_scale)
    double epsilon = 0.0;
    std::string scenario;
    std::uint64_t seed = 0;

    int rank() const { return static_cast<int>(W_true.cols()); }
    std::vector<Index> class_sizes() const;
};

/// m = 30, n = 100, r = 5; 10 pure columns per class, 50 Dirichlet(alpha) mixtures, Gaussian noise.
SyntheticInstance gen_dirichlet(std::uint64_t seed, double eps, double alpha = 1.0);

/// m = 30, n = 95, r = 10; 5 pure columns per class and the 45 pairwise midpoints,
/// with noise on the midpoints pushing them away from the pure-column centroid.
SyntheticInstance gen_midpoints(std::uint64_t seed, double eps);

/// m = 30, r = 5; 10 pure columns per class (noiseless) plus `ell` uniform [0,1] outlier columns.
SyntheticInstance gen_outliers(std::uint64_t seed, int ell);

/// Gaussian noise N with ||N||_F = eps ||M0||_F.
Matrix gaussian_noise(Index m, Index n, double eps, double reference_norm, std::uint64_t seed);

/// Noise levels used by the sweeps: logspace(lo, hi, count) in base 10.
std::vector<double> logspace(double lo_exp, double hi_exp, int count);
std::vector<double> dirichlet_noise_grid();
std::vector<double> midpoint_noise_grid();

/// Scale columns to unit l1 norm (zero columns untouched); returns the applied scalars.
Vector normalize_columns_l1(Matrix& M);

} // namespace cssnmf
