// Acceptance run: one PASS/FAIL line per criterion, exit status 0 only if all pass.
//
// usage: cssnmf_acceptance [output_dir]
// Sweep outputs are written twice (run1/, run2/) and compared byte for byte.

#include "cssnmf/csv.hpp"
#include "cssnmf/error.hpp"
#include "cssnmf/experiment.hpp"
#include "cssnmf/io.hpp"
#include "cssnmf/metrics.hpp"
#include "cssnmf/solver.hpp"

#include "support/instances.hpp"
#include "support/oracles.hpp"
#include "support/scratch.hpp"
#include "support/theory.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>

using namespace cssnmf;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigDir = CSSNMF_CONFIG_DIR;

struct Verdict {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Verdict& v, double seconds) {
    std::printf("%s  [%d] %s: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", id, name.c_str(), v.detail.c_str(), seconds);
    std::fflush(stdout);
    failures += !v.pass;
}

template <class F>
Verdict timed(double limit_s, double& seconds, F&& body) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v = body();
    seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (limit_s > 0 && seconds >= limit_s) {
        v.pass = false;
        v.detail += "; over the " + std::to_string(static_cast<int>(limit_s)) + " s budget";
    }
    return v;
}

std::string sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", x);
    return buf;
}

ExperimentConfig load_config(const std::string& name) {
    std::ifstream in(kConfigDir / name);
    if (!in) throw DataError("missing config " + name);
    nlohmann::json j;
    in >> j;
    return experiment_config_from_json(j);
}

// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    auto ranks = [](const std::vector<double>& v) {
        std::vector<size_t> idx(v.size());
        for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
        std::vector<double> r(v.size());
        for (size_t i = 0; i < idx.size();) {
            size_t j = i;
            while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
            for (size_t k = i; k <= j; ++k) r[idx[k]] = 0.5 * static_cast<double>(i + j) + 1.0;
            i = j + 1;
        }
        return r;
    };
    const auto rx = ranks(x), ry = ranks(y);
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        mx += rx[i] / n;
        my += ry[i] / n;
    }
    double sxy = 0, sxx = 0, syy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

const AggregateRow& find(const std::vector<AggregateRow>& rows, double level, const std::string& method) {
    for (const auto& r : rows)
        if (r.level == level && r.method == method) return r;
    throw DataError("no aggregate row for " + method);
}

Matrix example_one_solution(const fixtures::ExampleOne& ex) {
    SolverConfig cfg;
    cfg.mu = 0.1 * ex.M.squaredNorm() / static_cast<double>(ex.M.cols());
    cfg.maxiter = 5000;
    cfg.restart_period = 200;
    cfg.lipschitz_safety = 1.01;
    cfg.mu_schedule = MuSchedule{1e-6 * ex.M.squaredNorm(), 0.5};
    return fgm_solve(ex.M, cfg).X;
}

Verdict criterion_block_mixture(const fs::path& out) {
    const auto ex = fixtures::example_one();
    const double k = kappa(ex.W);
    const Matrix X = example_one_solution(ex);
    const double err = (X - fixtures::example_one_X()).cwiseAbs().maxCoeff();
    fs::create_directories(out);
    write_csv_matrix(out / "X.csv", X);
    Verdict v;
    v.pass = k > 0.1 && err <= 1e-2;
    v.detail = "kappa(W) = " + sci(k) + " (> 0.1), max|X - X*| = " + sci(err) + " (<= 1e-2)";
    return v;
}

SweepReport sweep(const ExperimentConfig& cfg, const fs::path& out, int threads) {
    SweepReport rep = run_experiment(cfg, threads);
    write_report(out, cfg, rep);
    return rep;
}

Verdict criterion_dirichlet(const fs::path& out, int threads) {
    ExperimentConfig cfg = load_config("dirichlet.json");
    cfg.levels = {1e-5};
    const SweepReport rep = sweep(cfg, out, threads);
    const auto& a = find(rep.means, 1e-5, "cssnmf");
    Verdict v;
    v.pass = a.trials_ok == cfg.trials && a.accuracy >= 0.99 && a.d_w <= 1e-2;
    v.detail = std::to_string(a.trials_ok) + "/" + std::to_string(cfg.trials) + " trials, mean accuracy " +
               sci(a.accuracy) + " (>= 0.99), mean d_W " + sci(a.d_w) + " (<= 1e-2)";
    return v;
}

Verdict criterion_midpoints(const fs::path& out, int threads) {
    const ExperimentConfig cfg = load_config("midpoints.json");
    const SweepReport rep = sweep(cfg, out, threads);
    const auto levels = cfg.resolved_levels();
    Verdict v;
    std::ostringstream d;
    d << "cssnmf/spa accuracy by eps:";
    for (double eps : levels) {
        const auto& c = find(rep.means, eps, "cssnmf");
        const auto& s = find(rep.means, eps, "spa");
        d << " " << sci(eps) << " -> " << c.accuracy << "/" << s.accuracy;
        if (c.trials_ok != cfg.trials || c.accuracy != 1.0) v.pass = false;
        if (eps < 0.1 && s.accuracy != 1.0) v.pass = false;
    }
    const double top = levels.back();
    const double spa_top = find(rep.means, top, "spa").accuracy, cs_top = find(rep.means, top, "cssnmf").accuracy;
    if (!(spa_top < cs_top)) v.pass = false;
    d << "; largest level spa " << spa_top << " < cssnmf " << cs_top;
    v.detail = d.str();
    return v;
}

Verdict criterion_outliers(const fs::path& out, int threads) {
    const ExperimentConfig cfg = load_config("outliers.json");
    const SweepReport rep = sweep(cfg, out, threads);
    const auto levels = cfg.resolved_levels();
    Verdict v;
    std::vector<double> ells, mean_dw;
    std::string best_bad, avg_bad;
    double worst_best = 0.0, worst_avg = 0.0;
    for (double ell : levels) {
        const double best = find(rep.best, ell, "cssnmf-median").d_w;
        const double avg = find(rep.means, ell, "cssnmf-median").d_w;
        worst_best = std::max(worst_best, best);
        if (!(best <= 1e-8)) best_bad += " " + std::to_string(static_cast<int>(ell)) + ":" + sci(best);
        if (ell <= 9) {
            worst_avg = std::max(worst_avg, avg);
            if (!(avg <= 1e-8)) avg_bad += " " + std::to_string(static_cast<int>(ell)) + ":" + sci(avg);
        }
        ells.push_back(ell);
        mean_dw.push_back(find(rep.means, ell, "cssnmf-mean").d_w);
    }
    const double rho = spearman(ells, mean_dw);
    v.pass = best_bad.empty() && avg_bad.empty() && rho > 0.9;
    v.detail = "median best-over-trials max d_W " + sci(worst_best) + (best_bad.empty() ? "" : " [over 1e-8 at" + best_bad + "]") +
               ", median average max d_W (l <= 9) " + sci(worst_avg) +
               (avg_bad.empty() ? "" : " [over 1e-8 at" + avg_bad + "]") + ", mean-aggregation Spearman rho " +
               sci(rho) + " (> 0.9)";
    return v;
}

Verdict criterion_sos_identities() {
    RngStream rng(2025);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const Index p = 2 + static_cast<Index>(rng.below(9));
        const double alpha = 0.1 + 1.9 * rng.uniform();
        const double beta = (0.05 + 0.9 * rng.uniform()) * alpha / static_cast<double>(p);
        const double pd = static_cast<double>(p);

        // Uncapped: x* = alpha/p in every coordinate, f* = alpha^2/p.
        const Vector x = oracle::projected_gradient_sos(p, alpha, 0.0, false);
        worst = std::max(worst, (x.array() - alpha / pd).abs().maxCoeff());
        worst = std::max(worst, std::abs(x.squaredNorm() - alpha * alpha / pd));
        const auto lib = min_sum_of_squares(p, alpha);
        worst = std::max(worst, std::abs(lib.value - alpha * alpha / pd));

        // One coordinate capped at beta < alpha/p: f* = beta^2 + (alpha - beta)^2/(p - 1).
        const Index cap = static_cast<Index>(rng.below(static_cast<std::uint64_t>(p)));
        const double fstar = beta * beta + (alpha - beta) * (alpha - beta) / (pd - 1.0);
        const Vector y = oracle::projected_gradient_sos(p, alpha, beta, true, cap);
        worst = std::max(worst, std::abs(y.squaredNorm() - fstar));
        worst = std::max(worst, std::abs(y(cap) - beta));
        const auto libc = min_sum_of_squares_capped(p, alpha, beta, cap);
        worst = std::max(worst, std::abs(libc.value - fstar));
        worst = std::max(worst, (libc.x - y).cwiseAbs().maxCoeff());
    }
    Verdict v;
    v.pass = worst <= 1e-6;
    v.detail = "100 random (p, alpha, beta) triples, worst gap " + sci(worst) + " (<= 1e-6)";
    return v;
}

bool in_omega(const Matrix& X, const Vector& w, double tol) {
    for (Index i = 0; i < X.rows(); ++i) {
        if (X(i, i) > 1.0 + tol) return false;
        for (Index j = 0; j < X.cols(); ++j) {
            if (X(i, j) < -tol) return false;
            if (w(i) * X(i, j) > w(j) * X(i, i) + tol) return false;
        }
    }
    return true;
}

Verdict criterion_solver() {
    double worst_fd = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Matrix M = fixtures::random_normal(6, 6, 500 + seed);
        const Matrix Y = fixtures::random_normal(6, 6, 600 + seed);
        for (PenaltyKind pk : {PenaltyKind::SquaredDiag, PenaltyKind::Trace}) {
            const Matrix G = gradient(M, Y, 0.37, pk);
            const Matrix F =
                oracle::finite_difference([&](const Matrix& Z) { return objective(M, Z, 0.37, pk); }, Y);
            worst_fd = std::max(worst_fd, (G - F).norm() / G.norm());
        }
    }

    double worst_proj = 0.0;
    int rows = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Matrix Y = 1.5 * fixtures::random_normal(5, 5, 700 + seed);
        const Vector w = fixtures::random_uniform(5, 1, 800 + seed, 0.2, 2.0).col(0);
        const Matrix P = project_omega(Y, w);
        for (Index i = 0; i < 5; ++i, ++rows) {
            const Vector ref = oracle::omega_row_projection(Y.row(i).transpose(), i, w);
            worst_proj = std::max(worst_proj, (P.row(i).transpose() - ref).cwiseAbs().maxCoeff());
        }
    }

    int iterates = 0, outside = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Matrix M = fixtures::random_uniform(10, 12, 900 + seed);
        M.col(3) *= 7.0;
        const Vector w = col_l1_norms(M);
        SolverConfig cfg;
        cfg.mu = 0.05;
        cfg.maxiter = 300;
        cfg.early_stop = false;
        fgm_solve(M, cfg, [&](int, const Matrix& X) {
            ++iterates;
            outside += !in_omega(X, w, 1e-10);
        });
    }

    int increases = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Matrix M = fixtures::random_uniform(10, 15, 950 + seed);
        SolverConfig cfg;
        cfg.mu = 0.1;
        cfg.maxiter = 400;
        cfg.restart_period = 1;
        const auto res = fgm_solve(M, cfg);
        for (size_t k = 1; k < res.objective_trace.size(); ++k)
            increases += res.objective_trace[k] > res.objective_trace[k - 1] * (1 + 1e-14) + 1e-15;
    }

    Verdict v;
    v.pass = worst_fd <= 1e-5 && worst_proj <= 1e-8 && outside == 0 && increases == 0;
    v.detail = "gradient vs FD rel err " + sci(worst_fd) + " (<= 1e-5, 20 instances x 2 penalties), projection vs QP " +
               sci(worst_proj) + " (<= 1e-8, " + std::to_string(rows) + " rows), " + std::to_string(outside) + "/" +
               std::to_string(iterates) + " iterates outside Omega, " + std::to_string(increases) +
               " objective increases with restart_period = 1";
    return v;
}

Verdict criterion_threshold_sets() {
    int ok6 = 0, ok8 = 0;
    double min_margin6 = INFINITY;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        {
            const auto run = fixtures::theory_run(seed, fixtures::TheoryRegime::Thm6);
            const IndexList sel = diagonal_set_thm6(run.X, run.cert);
            const std::set<Index> chosen(sel.begin(), sel.end());
            std::set<Index> pure;
            bool ok = true;
            for (const auto& s : run.inst.pure_sets) {
                int hits = 0;
                for (Index j : s) {
                    hits += static_cast<int>(chosen.count(j));
                    pure.insert(j);
                }
                ok = ok && hits >= 1;
            }
            for (Index j : sel) ok = ok && pure.count(j) > 0;
            ok6 += ok;
            const double thr = (1.0 - run.cert.delta) / static_cast<double>(run.cert.p_max);
            for (Index j : run.inst.mixtures) min_margin6 = std::min(min_margin6, thr - run.X(j, j));
        }
        {
            const auto run = fixtures::theory_run(seed, fixtures::TheoryRegime::Thm8);
            const IndexList sel = diagonal_set_thm8(run.X, run.cert);
            IndexList pure;
            for (const auto& s : run.inst.pure_sets) pure.insert(pure.end(), s.begin(), s.end());
            std::sort(pure.begin(), pure.end());
            ok8 += sel == pure;
        }
    }
    Verdict v;
    v.pass = ok6 == 20 && ok8 == 20;
    v.detail = "coverage set under thm6_threshold on " + std::to_string(ok6) + "/20 instances (smallest mixture margin " +
               sci(min_margin6) + "), exact set = S under thm8_threshold on " + std::to_string(ok8) + "/20";
    return v;
}

// Every file under a, except timing.json, must exist under b with identical bytes (and vice versa).
Verdict compare_trees(const fs::path& a, const fs::path& b) {
    std::set<fs::path> fa, fb;
    for (const auto& e : fs::recursive_directory_iterator(a))
        if (e.is_regular_file() && e.path().filename() != "timing.json") fa.insert(fs::relative(e.path(), a));
    for (const auto& e : fs::recursive_directory_iterator(b))
        if (e.is_regular_file() && e.path().filename() != "timing.json") fb.insert(fs::relative(e.path(), b));
    Verdict v;
    int differ = 0;
    for (const auto& f : fa) {
        if (!fb.count(f) || fixtures::slurp(a / f) != fixtures::slurp(b / f)) {
            ++differ;
            if (differ <= 3) v.detail += " " + f.string();
        }
    }
    differ += static_cast<int>(std::count_if(fb.begin(), fb.end(), [&](const fs::path& f) { return !fa.count(f); }));
    v.pass = differ == 0 && !fa.empty();
    v.detail = std::to_string(fa.size()) + " files compared, " + std::to_string(differ) + " differ" +
               (differ ? " (" + v.detail.substr(1) + ")" : "");
    return v;
}

} // namespace

int main(int argc, char** argv) {
    const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "cssnmf_acceptance";
    fs::remove_all(out);
    const fs::path run1 = out / "run1", run2 = out / "run2";
    const int threads = worker_count();
    std::printf("acceptance outputs in %s (%d worker threads)\n", out.string().c_str(), threads);

    auto guarded = [](const std::function<Verdict()>& body) {
        try {
            return body();
        } catch (const std::exception& e) {
            return Verdict{false, std::string("exception: ") + e.what()};
        }
    };

    double s = 0;
    Verdict v = timed(5, s, [&] { return guarded([&] { return criterion_block_mixture(run1 / "blockmix"); }); });
    report(1, "Block-mixture golden solution", v, s);
    v = timed(180, s, [&] { return guarded([&] { return criterion_dirichlet(run1 / "dirichlet", threads); }); });
    report(2, "Dirichlet low-noise recovery", v, s);
    v = timed(300, s, [&] { return guarded([&] { return criterion_midpoints(run1 / "midpoints", threads); }); });
    report(3, "Midpoints adversarial noise", v, s);
    v = timed(300, s, [&] { return guarded([&] { return criterion_outliers(run1 / "outliers", threads); }); });
    report(4, "Outliers with median vs mean aggregation", v, s);
    v = timed(0, s, [&] { return guarded(criterion_sos_identities); });
    report(5, "Sum-of-squares identity oracles", v, s);
    v = timed(0, s, [&] { return guarded(criterion_solver); });
    report(6, "Solver correctness suite", v, s);
    v = timed(0, s, [&] { return guarded(criterion_threshold_sets); });
    report(7, "Diagonal threshold sets under the noise bounds", v, s);

    // Second pass with a different worker count, then compare bytes.
    v = timed(0, s, [&] {
        return guarded([&] {
            const Matrix X = example_one_solution(fixtures::example_one());
            fs::create_directories(run2 / "blockmix");
            write_csv_matrix(run2 / "blockmix" / "X.csv", X);
            const int other = threads > 1 ? 1 : 2;
            for (const char* name : {"dirichlet", "midpoints", "outliers"}) {
                ExperimentConfig cfg = load_config(std::string(name) + ".json");
                if (std::string(name) == "dirichlet") cfg.levels = {1e-5};
                sweep(cfg, run2 / name, other);
            }
            return compare_trees(run1, run2);
        });
    });
    report(8, "Byte-identical reruns", v, s);

    std::printf("%s: %d of 8 criteria failed\n", failures ? "FAILED" : "ALL PASSED", failures);
    return failures ? 1 : 0;
}
