#include "cssnmf/matrix.hpp"

#include "cssnmf/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace cssnmf {

void require_finite(const Matrix& M, std::string_view what) {
    if (!M.allFinite()) {
        throw DataError(std::string(what) + ": matrix contains NaN or Inf entries");
    }
}

double frobenius_norm(const Matrix& M) {
    double sum = 0.0;
    for (Index j = 0; j < M.cols(); ++j) {
        for (Index i = 0; i < M.rows(); ++i) sum += M(i, j) * M(i, j);
    }
    return std::sqrt(sum);
}

Vector col_l1_norms(const Matrix& M) {
    Vector w(M.cols());
    for (Index j = 0; j < M.cols(); ++j) w(j) = M.col(j).cwiseAbs().sum();
    return w;
}

double l1_operator_norm(const Matrix& M) {
    if (M.cols() == 0) return 0.0;
    return col_l1_norms(M).maxCoeff();
}

SpectralNormEstimate spectral_norm_sq(const Matrix& M, double tol, int max_iter) {
    if (!(tol > 0.0)) throw InvalidArgument("spectral_norm_sq: tol must be positive");
    SpectralNormEstimate est;
    if (M.size() == 0) return est;

    Vector v = Vector::Ones(M.cols()) / std::sqrt(static_cast<double>(M.cols()));
    double lambda = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        Vector Mv = M * v;
        Vector z = M.transpose() * Mv;
        const double next = Mv.squaredNorm();  // v has unit norm
        const double znorm = z.norm();
        est.iterations = it;
        est.value = next;
        if (znorm == 0.0) {
            // start vector orthogonal to the row space; fall back to a coordinate probe
            if (it == 1) {
                v = Vector::Zero(M.cols());
                Index jmax = 0;
                M.colwise().squaredNorm().maxCoeff(&jmax);
                v(jmax) = 1.0;
                continue;
            }
            est.converged = true;
            return est;
        }
        if (it > 1 && std::abs(next - lambda) <= tol * next) {
            est.converged = true;
            return est;
        }
        lambda = next;
        v = z / znorm;
    }
    return est;
}

SymEig sym_eig(const Matrix& S) {
    if (S.rows() != S.cols()) throw InvalidArgument("sym_eig: matrix must be square");
    const Index n = S.rows();
    const double scale = frobenius_norm(S);
    if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(scale, 1.0) && n > 0) {
        throw InvalidArgument("sym_eig: matrix is not symmetric");
    }

    Matrix A = 0.5 * (S + S.transpose());
    Matrix V = Matrix::Identity(n, n);
    const double target = 1e-12 * scale;

    auto off_mass = [&]() {
        double sum = 0.0;
        for (Index j = 0; j < n; ++j)
            for (Index i = 0; i < n; ++i)
                if (i != j) sum += A(i, j) * A(i, j);
        return std::sqrt(sum);
    };

    constexpr int kMaxSweeps = 100;
    int sweep = 0;
    while (off_mass() > target) {
        if (++sweep > kMaxSweeps) throw NumericalError("sym_eig: Jacobi sweeps did not converge");
        for (Index p = 0; p < n - 1; ++p) {
            for (Index q = p + 1; q < n; ++q) {
                const double apq = A(p, q);
                if (apq == 0.0) continue;
                const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (Index k = 0; k < n; ++k) {
                    const double akp = A(k, p);
                    const double akq = A(k, q);
                    A(k, p) = c * akp - s * akq;
                    A(k, q) = s * akp + c * akq;
                }
                for (Index k = 0; k < n; ++k) {
                    const double apk = A(p, k);
                    const double aqk = A(q, k);
                    A(p, k) = c * apk - s * aqk;
                    A(q, k) = s * apk + c * aqk;
                }
                for (Index k = 0; k < n; ++k) {
                    const double vkp = V(k, p);
                    const double vkq = V(k, q);
                    V(k, p) = c * vkp - s * vkq;
                    V(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<Index> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return A(a, a) < A(b, b); });
    SymEig out{Vector(n), Matrix(n, n)};
    for (Index k = 0; k < n; ++k) {
        out.values(k) = A(order[k], order[k]);
        out.vectors.col(k) = V.col(order[k]);
    }
    return out;
}

} // namespace cssnmf
