#include "cssnmf/postprocess.hpp"

#include "cssnmf/error.hpp"
#include "cssnmf/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace cssnmf {

Vector row_scores(const Matrix& X, SelectionScore score) {
    if (score == SelectionScore::Diagonal) return X.diagonal();
    Vector s(X.rows());
    for (Index i = 0; i < X.rows(); ++i) s(i) = X.row(i).cwiseAbs().sum();
    return s;
}

namespace {

IndexList best_rows(const Vector& scores, Index count) {
    IndexList order(static_cast<size_t>(scores.size()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return scores(a) > scores(b); });
    order.resize(static_cast<size_t>(count));
    std::sort(order.begin(), order.end());
    return order;
}

} // namespace

IndexList select_rows(const Matrix& X, const SelectionRule& rule) {
    if (X.rows() != X.cols()) throw InvalidArgument("select_rows: X must be square");
    const Index n = X.rows();
    const Vector scores = row_scores(X, rule.score);
    if (const auto* top = std::get_if<TopP>(&rule.rule)) {
        if (top->p < 1 || top->p > n) {
            throw InvalidArgument("select_rows: p must lie in [1, " + std::to_string(n) + "]");
        }
        return best_rows(scores, top->p);
    }
    const auto& thr = std::get<Threshold>(rule.rule);
    if (thr.min_count < 1 || thr.min_count > n) throw InvalidArgument("select_rows: min_count out of range");
    IndexList K;
    for (Index i = 0; i < n; ++i)
        if (scores(i) >= thr.delta) K.push_back(i);
    if (static_cast<Index>(K.size()) < thr.min_count) return best_rows(scores, thr.min_count);
    return K;
}

namespace {

double sq_dist(const Matrix& P, Index i, const Matrix& C, Index c) {
    return (P.row(i) - C.row(c)).squaredNorm();
}

struct KMeansRun {
    std::vector<int> labels;
    double inertia = 0.0;
};

Matrix kmeanspp_centers(const Matrix& P, int k, RngStream& rng) {
    const Index n = P.rows();
    Matrix C(k, P.cols());
    C.row(0) = P.row(static_cast<Index>(rng.below(static_cast<std::uint64_t>(n))));
    Vector d2(n);
    for (Index i = 0; i < n; ++i) d2(i) = sq_dist(P, i, C, 0);
    for (int c = 1; c < k; ++c) {
        const double total = d2.sum();
        Index pick = 0;
        if (total > 0.0) {
            const double u = rng.uniform() * total;
            double acc = 0.0;
            pick = n - 1;
            for (Index i = 0; i < n; ++i) {
                acc += d2(i);
                if (u < acc) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
        }
        C.row(c) = P.row(pick);
        for (Index i = 0; i < n; ++i) d2(i) = std::min(d2(i), sq_dist(P, i, C, c));
    }
    return C;
}

KMeansRun lloyd(const Matrix& P, Matrix C, int max_iter) {
    const Index n = P.rows();
    const int k = static_cast<int>(C.rows());
    std::vector<int> labels(static_cast<size_t>(n), -1);

    auto assign = [&]() {
        bool changed = false;
        for (Index i = 0; i < n; ++i) {
            int best = 0;
            double bd = sq_dist(P, i, C, 0);
            for (int c = 1; c < k; ++c) {
                const double d = sq_dist(P, i, C, c);
                if (d < bd) {
                    bd = d;
                    best = c;
                }
            }
            if (labels[i] != best) {
                labels[i] = best;
                changed = true;
            }
        }
        // Empty-cluster repair: move the point farthest from its centroid.
        for (int c = 0; c < k; ++c) {
            std::vector<int> counts(static_cast<size_t>(k), 0);
            for (int l : labels) ++counts[l];
            if (counts[c] > 0) continue;
            Index far = -1;
            double fd = -1.0;
            for (Index i = 0; i < n; ++i) {
                if (counts[labels[i]] <= 1) continue;
                const double d = sq_dist(P, i, C, labels[i]);
                if (d > fd) {
                    fd = d;
                    far = i;
                }
            }
            if (far < 0) break;
            labels[far] = c;
            C.row(c) = P.row(far);
            changed = true;
        }
        return changed;
    };

    auto update = [&]() {
        Matrix sums = Matrix::Zero(k, P.cols());
        std::vector<int> counts(static_cast<size_t>(k), 0);
        for (Index i = 0; i < n; ++i) {
            sums.row(labels[i]) += P.row(i);
            ++counts[labels[i]];
        }
        for (int c = 0; c < k; ++c)
            if (counts[c] > 0) C.row(c) = sums.row(c) / counts[c];
    };

    for (int it = 0; it < max_iter; ++it) {
        if (!assign() && it > 0) break;
        update();
    }
    KMeansRun run{labels, 0.0};
    for (Index i = 0; i < n; ++i) run.inertia += sq_dist(P, i, C, labels[i]);
    return run;
}

bool lex_greater(const std::vector<double>& a, const std::vector<double>& b) {
    return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

} // namespace

std::vector<int> spectral_cluster(const Matrix& S_in, int r, std::uint64_t seed, const SpectralClusterOptions& opts) {
    if (S_in.rows() != S_in.cols()) throw InvalidArgument("spectral_cluster: S must be square");
    const Index p = S_in.rows();
    if (r < 1) throw InvalidArgument("spectral_cluster: r must be positive");
    if (r > p) throw InvalidArgument("spectral_cluster: r exceeds the number of points");
    if (opts.restarts < 1 || opts.max_iter < 1) throw InvalidArgument("spectral_cluster: bad k-means options");
    const double scale = std::max(1.0, S_in.cwiseAbs().maxCoeff());
    if ((S_in - S_in.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw InvalidArgument("spectral_cluster: S is not symmetric");
    }
    if (S_in.minCoeff() < -1e-12 * scale) throw InvalidArgument("spectral_cluster: S has negative entries");
    Matrix S = (0.5 * (S_in + S_in.transpose())).cwiseMax(0.0);
    if (!opts.self_loops) S.diagonal().setZero();

    // Canonical order: degree descending, then sorted row contents descending.
    const Vector degree = S.rowwise().sum();
    std::vector<std::vector<double>> keys(static_cast<size_t>(p));
    for (Index i = 0; i < p; ++i) {
        keys[i].reserve(static_cast<size_t>(p));
        for (Index j = 0; j < p; ++j) keys[i].push_back(S(i, j));
        std::sort(keys[i].begin(), keys[i].end(), std::greater<>());
    }
    IndexList order(static_cast<size_t>(p));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        if (degree(a) != degree(b)) return degree(a) > degree(b);
        return lex_greater(keys[a], keys[b]);
    });
    Matrix Sc(p, p);
    for (Index a = 0; a < p; ++a)
        for (Index b = 0; b < p; ++b) Sc(a, b) = S(order[a], order[b]);

    Vector dinv(p);
    for (Index i = 0; i < p; ++i) {
        const double d = Sc.row(i).sum();
        dinv(i) = 1.0 / std::sqrt(d > 0.0 ? d : 1.0);
    }
    const Matrix A = dinv.asDiagonal() * Sc * dinv.asDiagonal();
    const SymEig eig = sym_eig(A);
    Matrix U = eig.vectors.rightCols(r);
    for (Index i = 0; i < p; ++i) {
        const double nrm = U.row(i).norm();
        if (nrm > 0.0) U.row(i) /= nrm;
    }

    RngStream rng(seed);
    KMeansRun best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (int rep = 0; rep < opts.restarts; ++rep) {
        KMeansRun run = lloyd(U, kmeanspp_centers(U, r, rng), opts.max_iter);
        if (run.inertia < best.inertia) best = std::move(run);
    }

    std::vector<int> labels(static_cast<size_t>(p));
    for (Index a = 0; a < p; ++a) labels[order[a]] = best.labels[a];
    std::vector<int> rename(static_cast<size_t>(r), -1);
    int next = 0;
    for (auto& l : labels) {
        if (rename[l] < 0) rename[l] = next++;
        l = rename[l];
    }
    return labels;
}

Matrix aggregate(const Matrix& M, const IndexList& K, const std::vector<int>& labels, int r, AggregationRule rule) {
    if (K.size() != labels.size()) throw InvalidArgument("aggregate: K and labels differ in length");
    if (r < 1) throw InvalidArgument("aggregate: r must be positive");
    std::vector<IndexList> members(static_cast<size_t>(r));
    for (size_t i = 0; i < K.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= r) throw InvalidArgument("aggregate: label out of range");
        if (K[i] < 0 || K[i] >= M.cols()) throw InvalidArgument("aggregate: index out of range");
        members[static_cast<size_t>(labels[i])].push_back(K[i]);
    }
    Matrix W(M.rows(), r);
    std::vector<double> vals;
    for (int t = 0; t < r; ++t) {
        const auto& mem = members[static_cast<size_t>(t)];
        if (mem.empty()) throw InvalidArgument("aggregate: cluster " + std::to_string(t) + " is empty");
        if (rule == AggregationRule::Mean) {
            Vector sum = Vector::Zero(M.rows());
            for (Index j : mem) sum += M.col(j);
            W.col(t) = sum / static_cast<double>(mem.size());
            continue;
        }
        for (Index i = 0; i < M.rows(); ++i) {
            vals.clear();
            for (Index j : mem) vals.push_back(M(i, j));
            std::sort(vals.begin(), vals.end());
            const size_t h = vals.size() / 2;
            W(i, t) = vals.size() % 2 == 1 ? vals[h] : 0.5 * (vals[h - 1] + vals[h]);
        }
    }
    return W;
}

NnlsResult nnls_cd_detailed(const Matrix& M, const Matrix& W, double tol, int max_sweeps) {
    if (W.rows() != M.rows()) throw InvalidArgument("nnls_cd: W and M row counts differ");
    if (max_sweeps < 1) throw InvalidArgument("nnls_cd: max_sweeps must be positive");
    const Matrix G = W.transpose() * W;
    const Matrix F = W.transpose() * M;
    const Index r = W.cols();
    for (Index k = 0; k < r; ++k) {
        if (!(G(k, k) > 0.0)) throw InvalidArgument("nnls_cd: W has a zero column");
    }
    NnlsResult res{Matrix::Zero(r, M.cols()), 0, true};
    for (Index j = 0; j < M.cols(); ++j) {
        auto h = res.H.col(j);
        Vector grad = -F.col(j);  // G h - F with h = 0
        bool done = false;
        int sweeps = 0;
        while (sweeps < max_sweeps) {
            ++sweeps;
            double biggest = 0.0;
            for (Index k = 0; k < r; ++k) {
                const double next = std::max(0.0, h(k) - grad(k) / G(k, k));
                const double delta = next - h(k);
                if (delta != 0.0) {
                    h(k) = next;
                    grad += delta * G.col(k);
                }
                biggest = std::max(biggest, std::abs(delta));
            }
            if (biggest <= tol) {
                done = true;
                break;
            }
        }
        res.sweeps = std::max(res.sweeps, sweeps);
        res.converged = res.converged && done;
    }
    return res;
}

Matrix nnls_cd(const Matrix& M, const Matrix& W, double tol, int max_sweeps) {
    return nnls_cd_detailed(M, W, tol, max_sweeps).H;
}

CssnmfSolution cssnmf_postprocess(const Matrix& M, const Matrix& X, int r, const SelectionRule& rule,
                                  AggregationRule agg, std::uint64_t seed) {
    if (r < 1 || r > M.cols()) throw InvalidArgument("cssnmf: r must lie in [1, n]");
    SelectionRule effective = rule;
    if (auto* thr = std::get_if<Threshold>(&effective.rule)) thr->min_count = std::max<Index>(thr->min_count, r);

    CssnmfSolution sol;
    sol.K = select_rows(X, effective);
    if (static_cast<Index>(sol.K.size()) < r) throw InvalidArgument("cssnmf: fewer selected columns than r");

    const Index p = static_cast<Index>(sol.K.size());
    Matrix S(p, p);
    for (Index a = 0; a < p; ++a)
        for (Index b = 0; b < p; ++b) S(a, b) = 0.5 * (X(sol.K[a], sol.K[b]) + X(sol.K[b], sol.K[a]));
    sol.labels = spectral_cluster(S, r, seed);

    std::vector<int> counts(static_cast<size_t>(r), 0);
    for (int l : sol.labels) ++counts[l];
    if (std::count(counts.begin(), counts.end(), 0) > 0) {
        throw NumericalError("cssnmf: spectral clustering produced fewer than r non-empty clusters");
    }
    sol.W = aggregate(M, sol.K, sol.labels, r, agg);
    sol.H = nnls_cd(M, sol.W);
    sol.residual = (M - sol.W * sol.H).norm();
    return sol;
}

CssnmfSolution cssnmf_pipeline(const Matrix& M, int r, const SelectionRule& rule, AggregationRule agg,
                               const SolverConfig& solver, std::uint64_t seed) {
    if (r < 1) throw InvalidArgument("cssnmf: r must be positive");
    SolverResult res = fgm_solve(M, solver);
    CssnmfSolution sol = cssnmf_postprocess(M, res.X, r, rule, agg, seed);
    sol.solver = std::move(res);
    return sol;
}

} // namespace cssnmf
