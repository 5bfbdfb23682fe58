#include "cssnmf/synthgen.hpp"

#include "cssnmf/error.hpp"
#include "cssnmf/rng.hpp"

#include <cmath>

namespace cssnmf {

std::vector<Index> SyntheticInstance::class_sizes() const {
    std::vector<Index> sizes;
    for (const auto& s : pure_sets) sizes.push_back(static_cast<Index>(s.size()));
    return sizes;
}

Vector normalize_columns_l1(Matrix& M) {
    Vector scale = Vector::Ones(M.cols());
    for (Index j = 0; j < M.cols(); ++j) {
        const double s = M.col(j).cwiseAbs().sum();
        if (s > 0.0) {
            scale(j) = 1.0 / s;
            M.col(j) *= scale(j);
        }
    }
    return scale;
}

std::vector<double> logspace(double lo_exp, double hi_exp, int count) {
    if (count < 1) throw InvalidArgument("logspace: count must be positive");
    std::vector<double> out;
    for (int i = 0; i < count; ++i) {
        const double e = count == 1 ? hi_exp : lo_exp + (hi_exp - lo_exp) * i / (count - 1);
        out.push_back(std::pow(10.0, e));
    }
    return out;
}

std::vector<double> dirichlet_noise_grid() { return logspace(-5.0, -0.05, 7); }
std::vector<double> midpoint_noise_grid() { return logspace(-3.0, -0.05, 4); }

Matrix gaussian_noise(Index m, Index n, double eps, double reference_norm, std::uint64_t seed) {
    Matrix N = Matrix::Zero(m, n);
    if (eps == 0.0) return N;
    RngStream rng(seed);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < m; ++i) N(i, j) = rng.normal();
    const double nn = N.norm();
    if (nn > 0.0) N *= eps * reference_norm / nn;
    return N;
}

namespace {

Matrix uniform_matrix(Index m, Index n, RngStream& rng) {
    Matrix A(m, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < m; ++i) A(i, j) = rng.uniform();
    return A;
}

void one_hot_block(SyntheticInstance& inst, Matrix& H, int r, int per_class) {
    for (int t = 0; t < r; ++t) {
        IndexList set;
        for (int k = 0; k < per_class; ++k) {
            const Index j = static_cast<Index>(t) * per_class + k;
            H(t, j) = 1.0;
            set.push_back(j);
            inst.pure_columns.push_back(j);
            inst.labels.push_back(t);
        }
        inst.pure_sets.push_back(std::move(set));
    }
}

void check_eps(double eps) {
    if (!(eps >= 0.0) || !std::isfinite(eps)) throw InvalidArgument("noise level must be finite and nonnegative");
}

} // namespace

SyntheticInstance gen_dirichlet(std::uint64_t seed, double eps, double alpha) {
    check_eps(eps);
    if (!(alpha > 0.0)) throw InvalidArgument("gen_dirichlet: alpha must be positive");
    constexpr Index m = 30, r = 5, n0 = 50, n1 = 50;
    RngStream rng(seed);
    SyntheticInstance inst;
    inst.scenario = "dirichlet";
    inst.seed = seed;
    inst.epsilon = eps;
    inst.W_true = uniform_matrix(m, r, rng);

    Matrix H = Matrix::Zero(r, n0 + n1);
    one_hot_block(inst, H, r, static_cast<int>(n0 / r));
    for (Index j = n0; j < n0 + n1; ++j) {
        double total = 0.0;
        for (Index t = 0; t < r; ++t) {
            H(t, j) = rng.gamma(alpha);
            total += H(t, j);
        }
        H.col(j) /= total;
    }
    inst.H_true = H;

    const Matrix M0 = inst.W_true * H;
    const Matrix N = gaussian_noise(m, n0 + n1, eps, M0.norm(), rng.substream(1).next_u64());
    inst.M = (M0 + N).cwiseMax(0.0);
    inst.col_scale = normalize_columns_l1(inst.M);
    return inst;
}

SyntheticInstance gen_midpoints(std::uint64_t seed, double eps) {
    check_eps(eps);
    constexpr Index m = 30, r = 10, n0 = 50, n1 = 45;
    RngStream rng(seed);
    SyntheticInstance inst;
    inst.scenario = "midpoints";
    inst.seed = seed;
    inst.epsilon = eps;
    inst.W_true = uniform_matrix(m, r, rng);

    Matrix H = Matrix::Zero(r, n0 + n1);
    one_hot_block(inst, H, r, static_cast<int>(n0 / r));
    Index j = n0;
    for (Index p = 0; p < r; ++p) {
        for (Index q = p + 1; q < r; ++q, ++j) {
            H(p, j) = 0.5;
            H(q, j) = 0.5;
        }
    }
    inst.H_true = H;

    const Matrix M0 = inst.W_true * H;
    const Vector wbar = M0.leftCols(n0).rowwise().sum() / static_cast<double>(n0);
    Matrix N = Matrix::Zero(m, n0 + n1);
    N.rightCols(n1) = M0.rightCols(n1).colwise() - wbar;
    const double nn = N.norm();
    if (nn > 0.0) N *= eps * M0.norm() / nn;
    N = N.cwiseMax(0.0);
    inst.M = (M0 + N).cwiseMax(0.0);
    inst.col_scale = normalize_columns_l1(inst.M);
    return inst;
}

SyntheticInstance gen_outliers(std::uint64_t seed, int ell) {
    if (ell < 1 || ell > 15) throw InvalidArgument("gen_outliers: ell must lie in [1, 15]");
    constexpr Index m = 30, r = 5, n0 = 50, max_outliers = 15;
    RngStream rng(seed);
    SyntheticInstance inst;
    inst.scenario = "outliers";
    inst.seed = seed;
    inst.epsilon = 0.0;
    inst.W_true = uniform_matrix(m, r, rng);
    // Always draw the full outlier pool so smaller ell values see a prefix of the same columns.
    const Matrix B = uniform_matrix(m, max_outliers, rng);

    Matrix H = Matrix::Zero(r, n0 + ell);
    one_hot_block(inst, H, r, static_cast<int>(n0 / r));
    inst.H_true = H;

    inst.M.resize(m, n0 + ell);
    inst.M.leftCols(n0) = inst.W_true * H.leftCols(n0);
    inst.M.rightCols(ell) = B.leftCols(ell);
    inst.col_scale = normalize_columns_l1(inst.M);
    return inst;
}

} // namespace cssnmf
