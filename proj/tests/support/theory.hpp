#pragma once
// Noisy smooth-separable instances at a fraction of a recovery threshold,
// solved with the residual controller aimed at the injected noise level.

#include "cssnmf/metrics.hpp"
#include "cssnmf/solver.hpp"

#include "support/instances.hpp"

namespace fixtures {

struct TheoryRun {
    TheoryInstance inst;
    cssnmf::RobustnessCertificate cert;
    cssnmf::Matrix M;
    cssnmf::Matrix X;
};

enum class TheoryRegime { Thm6, Thm8 };

inline TheoryRun theory_run(std::uint64_t seed, TheoryRegime regime, double fraction = 0.5) {
    TheoryRun run;
    run.inst = theory_instance(seed);
    const auto noiseless = cssnmf::certificate(run.inst.W, run.inst.H, run.inst.pure_sets, 0.0);
    const double threshold =
        regime == TheoryRegime::Thm6 ? noiseless.thm6_threshold : noiseless.thm8_threshold;
    const double eps = fraction * threshold;
    run.cert = cssnmf::certificate_with_kappa(noiseless.kappa, run.inst.H, run.inst.pure_sets, eps);
    run.M = add_l1_noise(run.inst.M, eps, seed + 1000);

    cssnmf::SolverConfig cfg;
    cfg.maxiter = 3000;
    cfg.mu = 0.1 * run.M.squaredNorm() / static_cast<double>(run.M.cols());
    cfg.mu_control = cssnmf::MuControlConfig{cssnmf::MuStatistic::Residual, (run.M - run.inst.M).norm(), 0.5, 0};
    run.X = cssnmf::fgm_solve(run.M, cfg).X;
    return run;
}

} // namespace fixtures
