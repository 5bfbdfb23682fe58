#include "cssnmf/metrics.hpp"

#include "cssnmf/error.hpp"
#include "cssnmf/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cssnmf {

std::vector<Index> min_cost_assignment(const Matrix& cost) {
    if (cost.rows() != cost.cols()) throw InvalidArgument("min_cost_assignment: cost matrix must be square");
    const Index n = cost.rows();
    constexpr double kInf = std::numeric_limits<double>::infinity();
    // 1-based potentials; column 0 is a sentinel.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<Index> match(n + 1, 0), way(n + 1, 0);
    for (Index i = 1; i <= n; ++i) {
        match[0] = i;
        Index j0 = 0;
        std::vector<double> minv(n + 1, kInf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const Index i0 = match[j0];
            double delta = kInf;
            Index j1 = 0;
            for (Index j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (Index j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const Index j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<Index> col_of_row(static_cast<size_t>(n));
    for (Index j = 1; j <= n; ++j) col_of_row[match[j] - 1] = j - 1;
    return col_of_row;
}

double accuracy(const Matrix& H_hat, const std::vector<int>& labels, const IndexList& J0) {
    if (labels.size() != J0.size()) throw InvalidArgument("accuracy: labels and J0 differ in length");
    if (J0.empty()) throw InvalidArgument("accuracy: empty J0");
    const Index r = H_hat.rows();
    int r_true = 0;
    for (int l : labels) {
        if (l < 0) throw InvalidArgument("accuracy: negative label");
        r_true = std::max(r_true, l + 1);
    }
    const Index k = std::max<Index>(r, r_true);
    Matrix confusion = Matrix::Zero(k, k);
    for (size_t i = 0; i < J0.size(); ++i) {
        const Index j = J0[i];
        if (j < 0 || j >= H_hat.cols()) throw InvalidArgument("accuracy: J0 index out of range");
        Index pred = 0;
        for (Index t = 1; t < r; ++t)
            if (H_hat(t, j) > H_hat(pred, j)) pred = t;
        confusion(pred, labels[i]) += 1.0;
    }
    const auto match = min_cost_assignment(-confusion);
    double hits = 0.0;
    for (Index a = 0; a < k; ++a) hits += confusion(a, match[a]);
    return hits / static_cast<double>(J0.size());
}

namespace {

Matrix l2_normalized(const Matrix& W, const char* what) {
    Matrix out = W;
    for (Index j = 0; j < W.cols(); ++j) {
        const double nrm = W.col(j).norm();
        if (!(nrm > 0.0)) throw InvalidArgument(std::string(what) + ": zero column");
        out.col(j) /= nrm;
    }
    return out;
}

} // namespace

double rel_w_error(const Matrix& W_hat, const Matrix& W_true) {
    if (W_hat.rows() != W_true.rows() || W_hat.cols() != W_true.cols()) {
        throw InvalidArgument("rel_w_error: shape mismatch");
    }
    const Matrix A = l2_normalized(W_hat, "rel_w_error");
    const Matrix B = l2_normalized(W_true, "rel_w_error");
    const Index r = A.cols();
    Matrix cost(r, r);
    for (Index a = 0; a < r; ++a)
        for (Index b = 0; b < r; ++b) cost(a, b) = (A.col(a) - B.col(b)).squaredNorm();
    const auto match = min_cost_assignment(cost);
    Matrix permuted(A.rows(), r);
    for (Index a = 0; a < r; ++a) permuted.col(match[a]) = A.col(a);
    return (permuted - B).norm() / B.norm();
}

double rel_approx_error(const Matrix& M, const Matrix& W) {
    const double mn = M.norm();
    if (!(mn > 0.0)) throw InvalidArgument("rel_approx_error: M is zero");
    const Matrix P = nnls_cd(M, W, 1e-8, 500);
    return (M - W * P).norm() / mn;
}

double nonneg_l1_regression(const Matrix& A, const Vector& target) {
    if (A.rows() != target.size()) throw InvalidArgument("nonneg_l1_regression: shape mismatch");
    const Index m = A.rows();
    const Index k = A.cols();
    const Index nvar = k + 2 * m;  // x, u (positive residual), v (negative residual)
    constexpr double kTol = 1e-11;

    // Tableau rows: A x + u - v = b, each row sign-flipped so b >= 0.
    Matrix T = Matrix::Zero(m, nvar + 1);
    std::vector<Index> basis(static_cast<size_t>(m));
    for (Index i = 0; i < m; ++i) {
        const double sign = target(i) >= 0.0 ? 1.0 : -1.0;
        T.block(i, 0, 1, k) = sign * A.row(i);
        T(i, k + i) = sign;
        T(i, k + m + i) = -sign;
        T(i, nvar) = sign * target(i);
        basis[i] = sign > 0.0 ? k + i : k + m + i;
    }
    // Reduced costs of the phase-free start basis (all residual slacks).
    Vector d = Vector::Zero(nvar + 1);
    d.segment(k, 2 * m).setOnes();
    for (Index i = 0; i < m; ++i) d -= T.row(i).transpose();

    // Dantzig pricing; switch to Bland's rule after a run of degenerate pivots.
    const int max_pivots = static_cast<int>(50 * (m + nvar));
    int degenerate_run = 0;
    for (int pivots = 0;; ++pivots) {
        if (pivots > max_pivots) throw NumericalError("nonneg_l1_regression: simplex did not converge");
        const bool bland = degenerate_run > 20;
        Index enter = -1;
        double most = -kTol;
        for (Index j = 0; j < nvar; ++j) {
            if (d(j) < most) {
                enter = j;
                if (bland) break;
                most = d(j);
            }
        }
        if (enter < 0) break;
        Index leave = -1;
        double best = std::numeric_limits<double>::infinity();
        for (Index i = 0; i < m; ++i) {
            if (T(i, enter) <= kTol) continue;
            const double ratio = T(i, nvar) / T(i, enter);
            if (leave < 0 || ratio < best || (ratio == best && basis[i] < basis[leave])) {
                best = ratio;
                leave = i;
            }
        }
        if (leave < 0) throw NumericalError("nonneg_l1_regression: unbounded direction");
        degenerate_run = best <= kTol ? degenerate_run + 1 : 0;
        T.row(leave) /= T(leave, enter);
        for (Index i = 0; i < m; ++i) {
            if (i != leave && T(i, enter) != 0.0) T.row(i) -= T(i, enter) * T.row(leave);
        }
        d -= d(enter) * T.row(leave).transpose();
        for (Index i = 0; i < m; ++i) T(i, nvar) = std::max(T(i, nvar), 0.0);
        basis[leave] = enter;
    }

    Vector x = Vector::Zero(k);
    for (Index i = 0; i < m; ++i)
        if (basis[i] < k) x(basis[i]) = std::max(0.0, T(i, nvar));
    return (target - A * x).cwiseAbs().sum();
}

double kappa(const Matrix& W) {
    if (W.cols() < 2) throw InvalidArgument("kappa: W needs at least two columns");
    require_finite(W, "kappa");
    const Index r = W.cols();
    double best = std::numeric_limits<double>::infinity();
    for (Index kk = 0; kk < r; ++kk) {
        Matrix others(W.rows(), r - 1);
        for (Index j = 0, c = 0; j < r; ++j)
            if (j != kk) others.col(c++) = W.col(j);
        best = std::min(best, nonneg_l1_regression(others, W.col(kk)));
    }
    return best;
}

RobustnessCertificate certificate_with_kappa(double kappa_value, const Matrix& H,
                                             const std::vector<IndexList>& pure_sets, double eps) {
    if (pure_sets.empty()) throw InvalidArgument("certificate: no pure sets");
    if (!(eps >= 0.0 && eps < 1.0)) throw InvalidArgument("certificate: eps must lie in [0, 1)");
    RobustnessCertificate cert;
    cert.kappa = kappa_value;
    cert.epsilon = eps;
    std::vector<bool> pure(static_cast<size_t>(H.cols()), false);
    for (const auto& set : pure_sets) {
        if (set.empty()) throw InvalidArgument("certificate: empty pure set");
        cert.r_eff += 1.0 / static_cast<double>(set.size());
        cert.p_max = std::max<Index>(cert.p_max, static_cast<Index>(set.size()));
        for (Index j : set) {
            if (j < 0 || j >= H.cols()) throw InvalidArgument("certificate: pure index out of range");
            pure[j] = true;
        }
    }
    for (Index j = 0; j < H.cols(); ++j)
        if (!pure[j]) cert.beta = std::max(cert.beta, H.col(j).maxCoeff());
    if (cert.beta >= 1.0) throw InvalidArgument("certificate: index j should belong to S_t (beta >= 1)");

    const double kb = cert.kappa * cert.beta;
    const double gap = cert.kappa * (1.0 - cert.beta);
    cert.delta = eps == 0.0 ? 0.0 : 4.0 * eps * (1.0 + kb) / (gap * (1.0 - eps));
    const double pm = static_cast<double>(cert.p_max);
    cert.thm6_threshold = gap / (5.0 * (pm + 1.0) * (1.0 + kb));
    cert.thm8_threshold = gap / (18.0 * pm * pm * cert.r_eff);
    return cert;
}

RobustnessCertificate certificate(const Matrix& W, const Matrix& H, const std::vector<IndexList>& pure_sets,
                                  double eps) {
    if (W.cols() != H.rows()) throw InvalidArgument("certificate: W and H disagree on r");
    return certificate_with_kappa(kappa(W), H, pure_sets, eps);
}

namespace {

IndexList diagonal_above(const Matrix& X, double threshold) {
    IndexList out;
    for (Index j = 0; j < X.rows(); ++j)
        if (X(j, j) > threshold) out.push_back(j);
    return out;
}

} // namespace

IndexList diagonal_set_thm6(const Matrix& X, const RobustnessCertificate& cert) {
    return diagonal_above(X, (1.0 - cert.delta) / static_cast<double>(cert.p_max));
}

IndexList diagonal_set_thm8(const Matrix& X, const RobustnessCertificate& cert) {
    return diagonal_above(X, (1.0 - cert.delta) / static_cast<double>(cert.p_max) - std::sqrt(cert.delta * cert.r_eff));
}

SumOfSquaresMin min_sum_of_squares(Index p, double alpha) {
    if (p < 1 || !(alpha > 0.0)) throw InvalidArgument("min_sum_of_squares: need p >= 1 and alpha > 0");
    const double pd = static_cast<double>(p);
    return {Vector::Constant(p, alpha / pd), alpha * alpha / pd};
}

SumOfSquaresMin min_sum_of_squares_capped(Index p, double alpha, double beta, Index capped) {
    if (p < 2 || !(alpha > 0.0)) throw InvalidArgument("min_sum_of_squares_capped: need p > 1 and alpha > 0");
    if (!(beta < alpha / static_cast<double>(p))) throw InvalidArgument("min_sum_of_squares_capped: need beta < alpha / p");
    if (capped < 0 || capped >= p) throw InvalidArgument("min_sum_of_squares_capped: capped index out of range");
    const double rest = (alpha - beta) / static_cast<double>(p - 1);
    Vector x = Vector::Constant(p, rest);
    x(capped) = beta;
    return {x, beta * beta + (alpha - beta) * (alpha - beta) / static_cast<double>(p - 1)};
}

} // namespace cssnmf
