#include "cssnmf/baselines.hpp"
#include "cssnmf/error.hpp"
#include "cssnmf/experiment.hpp"
#include "cssnmf/metrics.hpp"
#include "cssnmf/postprocess.hpp"
#include "cssnmf/solver.hpp"
#include "cssnmf/synthgen.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace cssnmf;

namespace {

PenaltyKind parse_penalty(const std::string& s) {
    if (s == "squared_diag") return PenaltyKind::SquaredDiag;
    if (s == "trace") return PenaltyKind::Trace;
    throw InvalidArgument("penalty must be 'squared_diag' or 'trace'");
}

AggregationRule parse_agg(const std::string& s) {
    if (s == "mean") return AggregationRule::Mean;
    if (s == "median") return AggregationRule::Median;
    throw InvalidArgument("agg must be 'mean' or 'median'");
}

SolverSettings settings(int maxiter, int restart_period, double alpha0, std::optional<double> mu, double mu_factor,
                        std::optional<double> target_trace, std::optional<double> mu_final_factor, double mu_decay) {
    SolverSettings s;
    s.maxiter = maxiter;
    s.restart_period = restart_period;
    s.alpha0 = alpha0;
    s.mu = mu;
    s.mu_factor = mu_factor;
    s.target_trace = target_trace;
    s.mu_final_factor = mu_final_factor;
    s.mu_decay = mu_decay;
    return s;
}

py::dict solver_dict(const SolverResult& r) {
    py::dict d;
    d["X"] = r.X;
    d["objective_trace"] = r.objective_trace;
    d["final_mu"] = r.final_mu;
    d["iterations"] = r.iterations_run;
    return d;
}

py::dict instance_dict(const SyntheticInstance& inst) {
    py::dict d;
    d["M"] = inst.M;
    d["W_true"] = inst.W_true;
    d["H_true"] = inst.H_true;
    d["pure_columns"] = inst.pure_columns;
    d["labels"] = inst.labels;
    d["pure_sets"] = inst.pure_sets;
    d["col_scale"] = inst.col_scale;
    d["epsilon"] = inst.epsilon;
    d["scenario"] = inst.scenario;
    d["seed"] = inst.seed;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Convex smooth-separable NMF: solver, post-processing, baselines, generators and metrics";

    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_IOError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    m.def("project_omega", &project_omega, py::arg("Y"), py::arg("w"));
    m.def(
        "objective",
        [](const Matrix& M, const Matrix& X, double mu, const std::string& penalty) {
            return objective(M, X, mu, parse_penalty(penalty));
        },
        py::arg("M"), py::arg("X"), py::arg("mu"), py::arg("penalty") = "squared_diag");
    m.def(
        "gradient",
        [](const Matrix& M, const Matrix& Y, double mu, const std::string& penalty) {
            return gradient(M, Y, mu, parse_penalty(penalty));
        },
        py::arg("M"), py::arg("Y"), py::arg("mu"), py::arg("penalty") = "squared_diag");

    m.def(
        "fgm_solve",
        [](const Matrix& M, int r, int maxiter, int restart_period, double alpha0, std::optional<double> mu,
           double mu_factor, std::optional<double> target_trace, std::optional<double> mu_final_factor,
           double mu_decay) {
            const SolverConfig cfg =
                settings(maxiter, restart_period, alpha0, mu, mu_factor, target_trace, mu_final_factor, mu_decay)
                    .build(M, r);
            py::gil_scoped_release release;
            SolverResult res = fgm_solve(M, cfg);
            py::gil_scoped_acquire acquire;
            return solver_dict(res);
        },
        "Solve the penalized self-dictionary model. mu=None uses the trace controller (target r/2 + 1 unless "
        "target_trace is given); mu_final_factor switches to a geometric mu schedule.",
        py::arg("M"), py::arg("r"), py::arg("maxiter") = 1000, py::arg("restart_period") = 50,
        py::arg("alpha0") = 0.05, py::arg("mu") = py::none(), py::arg("mu_factor") = 0.1,
        py::arg("target_trace") = py::none(), py::arg("mu_final_factor") = py::none(), py::arg("mu_decay") = 0.5);

    m.def(
        "cssnmf",
        [](const Matrix& M, int r, std::optional<Index> p, std::optional<double> delta, const std::string& agg,
           std::uint64_t seed, int maxiter, int restart_period, std::optional<double> mu, double mu_factor,
           std::optional<double> target_trace, std::optional<double> mu_final_factor) {
            if (p.has_value() == delta.has_value()) throw InvalidArgument("give exactly one of p and delta");
            SelectionRule rule;
            if (p) rule.rule = TopP{*p};
            else rule.rule = Threshold{*delta, static_cast<Index>(r)};
            const SolverConfig cfg =
                settings(maxiter, restart_period, 0.05, mu, mu_factor, target_trace, mu_final_factor, 0.5).build(M, r);
            CssnmfSolution sol;
            {
                py::gil_scoped_release release;
                sol = cssnmf_pipeline(M, r, rule, parse_agg(agg), cfg, seed);
            }
            py::dict d;
            d["K"] = sol.K;
            d["labels"] = sol.labels;
            d["W"] = sol.W;
            d["H"] = sol.H;
            d["residual"] = sol.residual;
            d["X"] = sol.solver.X;
            d["final_mu"] = sol.solver.final_mu;
            return d;
        },
        py::arg("M"), py::arg("r"), py::arg("p") = py::none(), py::arg("delta") = py::none(), py::arg("agg") = "mean",
        py::arg("seed") = 0, py::arg("maxiter") = 1000, py::arg("restart_period") = 50, py::arg("mu") = py::none(),
        py::arg("mu_factor") = 0.1, py::arg("target_trace") = py::none(), py::arg("mu_final_factor") = py::none());

    m.def(
        "select_rows",
        [](const Matrix& X, std::optional<Index> p, std::optional<double> delta, Index min_count) {
            if (p.has_value() == delta.has_value()) throw InvalidArgument("give exactly one of p and delta");
            SelectionRule rule;
            if (p) rule.rule = TopP{*p};
            else rule.rule = Threshold{*delta, min_count};
            return select_rows(X, rule);
        },
        py::arg("X"), py::arg("p") = py::none(), py::arg("delta") = py::none(), py::arg("min_count") = 1);
    m.def(
        "spectral_cluster", [](const Matrix& S, int r, std::uint64_t seed) { return spectral_cluster(S, r, seed); },
        py::arg("S"), py::arg("r"), py::arg("seed") = 0);
    m.def(
        "aggregate",
        [](const Matrix& M, const IndexList& K, const std::vector<int>& labels, int r, const std::string& agg) {
            return aggregate(M, K, labels, r, parse_agg(agg));
        },
        py::arg("M"), py::arg("K"), py::arg("labels"), py::arg("r"), py::arg("agg") = "mean");
    m.def("nnls", &nnls_cd, py::arg("M"), py::arg("W"), py::arg("tol") = 1e-10, py::arg("max_sweeps") = 1000);

    m.def("spa", &spa, py::arg("M"), py::arg("r"));
    m.def(
        "sspa",
        [](const Matrix& M, int r, Index nplp, const std::string& agg) {
            SspaConfig cfg;
            cfg.nplp = nplp;
            cfg.aggregation = parse_agg(agg);
            const SspaResult res = sspa(M, r, cfg);
            py::dict d;
            d["clusters"] = res.clusters;
            d["W"] = res.W;
            return d;
        },
        py::arg("M"), py::arg("r"), py::arg("nplp"), py::arg("agg") = "mean");
    m.def(
        "fgnsr",
        [](const Matrix& M, int r, int maxiter) {
            SolverConfig cfg = fgnsr_default_config(M, r);
            cfg.maxiter = maxiter;
            return fgnsr_baseline(M, r, cfg);
        },
        py::arg("M"), py::arg("r"), py::arg("maxiter") = 1000);

    m.def(
        "gen_dirichlet", [](std::uint64_t seed, double eps, double alpha) { return instance_dict(gen_dirichlet(seed, eps, alpha)); },
        py::arg("seed"), py::arg("eps"), py::arg("alpha") = 1.0);
    m.def(
        "gen_midpoints", [](std::uint64_t seed, double eps) { return instance_dict(gen_midpoints(seed, eps)); },
        py::arg("seed"), py::arg("eps"));
    m.def(
        "gen_outliers", [](std::uint64_t seed, int ell) { return instance_dict(gen_outliers(seed, ell)); },
        py::arg("seed"), py::arg("ell"));

    m.def("accuracy", &accuracy, py::arg("H"), py::arg("labels"), py::arg("J0"));
    m.def("rel_w_error", &rel_w_error, py::arg("W_hat"), py::arg("W_true"));
    m.def("rel_approx_error", &rel_approx_error, py::arg("M"), py::arg("W"));
    m.def("kappa", &kappa, py::arg("W"));
    m.def(
        "certificate",
        [](const Matrix& W, const Matrix& H, const std::vector<IndexList>& pure_sets, double eps) {
            const RobustnessCertificate c = certificate(W, H, pure_sets, eps);
            py::dict d;
            d["kappa"] = c.kappa;
            d["beta"] = c.beta;
            d["r_eff"] = c.r_eff;
            d["p_max"] = c.p_max;
            d["epsilon"] = c.epsilon;
            d["delta"] = c.delta;
            d["thm6_threshold"] = c.thm6_threshold;
            d["thm8_threshold"] = c.thm8_threshold;
            return d;
        },
        py::arg("W"), py::arg("H"), py::arg("pure_sets"), py::arg("eps"));
}
