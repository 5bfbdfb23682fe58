#pragma once
// Hand-built instances shared by unit and acceptance tests.

#include "cssnmf/matrix.hpp"
#include "cssnmf/rng.hpp"
#include "cssnmf/synthgen.hpp"

#include <cstdint>
#include <vector>

namespace fixtures {

using cssnmf::Index;
using cssnmf::IndexList;
using cssnmf::Matrix;
using cssnmf::Vector;

inline Matrix random_uniform(Index m, Index n, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
    cssnmf::RngStream rng(seed);
    Matrix A(m, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < m; ++i) A(i, j) = rng.uniform(lo, hi);
    return A;
}

inline Matrix random_normal(Index m, Index n, std::uint64_t seed) {
    cssnmf::RngStream rng(seed);
    Matrix A(m, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < m; ++i) A(i, j) = rng.normal();
    return A;
}

// Three vertices with class sizes (2, 3, 1) followed by the three pairwise midpoints.
inline Matrix example_one_H() {
    Matrix H(3, 9);
    H << 1, 1, 0, 0, 0, 0, 0.0, 0.5, 0.5,
         0, 0, 1, 1, 1, 0, 0.5, 0.0, 0.5,
         0, 0, 0, 0, 0, 1, 0.5, 0.5, 0.0;
    return H;
}

// The optimal self-dictionary matrix for example_one_H in the noiseless case.
inline Matrix example_one_X() {
    Matrix X = Matrix::Zero(9, 9);
    for (int i : {0, 1}) {
        X(i, 0) = X(i, 1) = 0.5;
        X(i, 7) = X(i, 8) = 0.25;
    }
    for (int i : {2, 3, 4}) {
        X(i, 2) = X(i, 3) = X(i, 4) = 1.0 / 3.0;
        X(i, 6) = X(i, 8) = 1.0 / 6.0;
    }
    X(5, 5) = 1.0;
    X(5, 6) = X(5, 7) = 0.5;
    return X;
}

struct ExampleOne {
    Matrix W;  // m x 3, l1-normalized columns
    Matrix M;  // W * example_one_H()
};

inline ExampleOne example_one(Index m = 20, std::uint64_t seed = 2024) {
    ExampleOne ex;
    ex.W = random_uniform(m, 3, seed);
    cssnmf::normalize_columns_l1(ex.W);
    ex.M = ex.W * example_one_H();
    return ex;
}

// Smooth-separable instance with column-wise l1-bounded noise, used by the
// recovery-bound checks: r = 3 vertices with class sizes (2, 3, 2) and six
// mixtures whose largest coefficient is at most beta_cap.
struct TheoryInstance {
    Matrix W;
    Matrix H;
    Matrix M;
    std::vector<IndexList> pure_sets;
    IndexList mixtures;
};

inline TheoryInstance theory_instance(std::uint64_t seed, Index m = 10, double beta_cap = 0.6) {
    cssnmf::RngStream rng(seed);
    TheoryInstance inst;
    const std::vector<Index> sizes{2, 3, 2};
    const Index r = 3, nmix = 6;
    Index n = nmix;
    for (Index s : sizes) n += s;
    inst.W = Matrix(m, r);
    for (Index j = 0; j < r; ++j)
        for (Index i = 0; i < m; ++i) inst.W(i, j) = rng.uniform();
    cssnmf::normalize_columns_l1(inst.W);
    inst.H = Matrix::Zero(r, n);
    Index col = 0;
    for (Index t = 0; t < r; ++t) {
        IndexList set;
        for (Index k = 0; k < sizes[t]; ++k, ++col) {
            inst.H(t, col) = 1.0;
            set.push_back(col);
        }
        inst.pure_sets.push_back(set);
    }
    for (Index k = 0; k < nmix; ++k, ++col) {
        Vector h(r);
        do {
            for (Index t = 0; t < r; ++t) h(t) = rng.gamma(1.0);
            h /= h.sum();
        } while (h.maxCoeff() > beta_cap);
        inst.H.col(col) = h;
        inst.mixtures.push_back(col);
    }
    inst.M = inst.W * inst.H;
    return inst;
}

// Adds noise with ||N(:,j)||_1 = eps exactly to every column.
inline Matrix add_l1_noise(const Matrix& M0, double eps, std::uint64_t seed) {
    cssnmf::RngStream rng(seed);
    Matrix M = M0;
    for (Index j = 0; j < M.cols(); ++j) {
        Vector d(M.rows());
        for (Index i = 0; i < M.rows(); ++i) d(i) = rng.normal();
        M.col(j) += eps * d / d.cwiseAbs().sum();
    }
    return M;
}

} // namespace fixtures
