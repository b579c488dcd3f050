#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "ilmc/errors.hpp"
#include "ilmc/potentials.hpp"
#include "ilmc/prox.hpp"
#include "ilmc/rng.hpp"
#include "oracles.hpp"

namespace ilmc {
namespace {

const Potential kGauss = make_gaussian(1, 1.0);
const Potential kGl = make_ginzburg_landau(1, 1.0, 1.0);

TEST(Phi, ForwardMap) {
  EXPECT_DOUBLE_EQ(phi(kGl, 0.1, scalar_vec(2.0))[0], 4.8);
  EXPECT_DOUBLE_EQ(phi(kGauss, 0.1, scalar_vec(2.0))[0], 2.2);
}

TEST(Phi, CriticalPointsAreFixed) {
  EXPECT_DOUBLE_EQ(phi(kGl, 0.1, scalar_vec(0.0))[0], 0.0);
  const double xm = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(phi(kGl, 0.1, scalar_vec(xm))[0], xm, 1e-15);
}

TEST(PhiInverse, GaussianIsLinear) {
  EXPECT_NEAR(phi_inverse(kGauss, 0.1, scalar_vec(2.2))[0], 2.0, 1e-12);
}

TEST(PhiInverse, InvertsForwardEvaluation) {
  EXPECT_NEAR(phi_inverse(kGl, 0.1, scalar_vec(4.8))[0], 2.0, 1e-12);
  EXPECT_DOUBLE_EQ(phi_inverse(kGl, 0.1, scalar_vec(0.0))[0], 0.0);
}

TEST(PhiInverse, LargeStepOnPureQuartic) {
  const Potential quartic = make_ginzburg_landau(1, 1.0, 0.0);
  const double oracle = testing::gl_prox_root(1.0, 0.0, 0.5, 10.0);
  EXPECT_NEAR(oracle, 1.61262, 1e-5);
  EXPECT_NEAR(phi_inverse(quartic, 0.5, scalar_vec(10.0))[0], oracle, 1e-12);
}

TEST(PhiInverse, InadmissibleStepIsRejected) {
  EXPECT_THROW(phi_inverse(kGl, 0.5, scalar_vec(10.0)), AdmissibilityError);
  ProxConfig cfg;
  cfg.check_admissible = false;
  const double oracle = testing::gl_prox_root(1.0, 1.0, 0.5, 10.0);
  EXPECT_NEAR(oracle, std::cbrt(5.0), 1e-12);
  EXPECT_NEAR(phi_inverse(kGl, 0.5, scalar_vec(10.0), cfg)[0], oracle, 1e-12);
}

TEST(PhiInverse, FirstOrderOptimality) {
  const ProxConfig cfg;
  for (double h : {0.001, 0.01, 0.1, 0.2}) {
    for (double x0 : {-7.0, -1.0, -0.3, 0.2, 0.9, 3.0, 25.0}) {
      const Vec x = phi_inverse(kGl, h, scalar_vec(x0), cfg);
      const Vec grad = kGl.grad(x) + (x - scalar_vec(x0)) / h;
      EXPECT_LE(grad.norm(), cfg.tol / h) << h << " " << x0;
    }
  }
}

TEST(PhiInverse, MinimizesProxObjective) {
  const Potential p = make_ginzburg_landau(2, 1.0, 1.0);
  CounterRng rng(3, 0, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec x0 = rng.normal_vec(2, 4.0);
    const Vec x = phi_inverse(p, 0.1, x0);
    const double best = prox_objective(p, 0.1, x, x0);
    for (int k = 0; k < 8; ++k) {
      const Vec probe = x + rng.normal_vec(2, 1e-4);
      EXPECT_GE(prox_objective(p, 0.1, probe, x0), best - 1e-14);
    }
  }
}

TEST(PhiInverse, RoundTripIn3D) {
  const Potential p = make_ginzburg_landau(3, 1.0, 1.0);
  CounterRng rng(4, 0, 0);
  for (int trial = 0; trial < 500; ++trial) {
    const Vec x = rng.normal_vec(3, 9.0);
    const Vec y = phi(p, 0.05, x);
    EXPECT_LE((phi_inverse(p, 0.05, y) - x).norm(), 1e-10 * (1.0 + x.norm()));
  }
}

TEST(PhiInverse, TooFewIterationsFailLoudly) {
  ProxConfig cfg;
  cfg.max_iters = 1;
  EXPECT_THROW(phi_inverse(kGl, 0.1, scalar_vec(1000.0), cfg), ConvergenceError);
  try {
    phi_inverse(kGl, 0.1, scalar_vec(1000.0), cfg);
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.residual(), 0.0);
  }
}

TEST(ProxObjective, DirectSubstitution) {
  EXPECT_DOUBLE_EQ(prox_objective(kGauss, 0.1, scalar_vec(0.0), scalar_vec(0.0)), 0.0);
  EXPECT_DOUBLE_EQ(prox_objective(kGauss, 1.0, scalar_vec(1.0), scalar_vec(0.0)), 1.0);
}

TEST(ProxConfig, Validation) {
  ProxConfig cfg;
  cfg.tol = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.max_iters = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.damping_shrink = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_THROW(phi_inverse(kGauss, 0.0, scalar_vec(1.0)), ConfigError);
}

TEST(Admissibility, StepBound) {
  const ProxConfig cfg;
  EXPECT_NEAR(max_admissible_step(kGl, cfg), 0.9 / 4.0, 1e-15);
  EXPECT_EQ(max_admissible_step(kGauss, cfg), std::numeric_limits<double>::infinity());
  EXPECT_NO_THROW(require_admissible(kGl, 0.2, cfg));
  EXPECT_THROW(require_admissible(kGl, 0.23, cfg), AdmissibilityError);
}

TEST(LipschitzProbe, GaussianRatioIsExact) {
  for (double h : {0.001, 0.01, 0.1}) {
    const LipschitzReport rep = lipschitz_probe(kGauss, h, 2000, 1);
    EXPECT_TRUE(rep.passed());
    EXPECT_GT(rep.n_far, 0u);
    EXPECT_GT(rep.n_near, 0u);
    EXPECT_NEAR(rep.max_ratio_far, 1.0 / (1.0 + h), 1e-9);
    EXPECT_NEAR(rep.max_ratio_near, 1.0 / (1.0 + h), 1e-9);
  }
}

TEST(LipschitzProbe, GinzburgLandauOnModerateBox) {
  const LipschitzReport rep = lipschitz_probe(kGl, 0.01, 10000, 2, {}, 6.0);
  EXPECT_EQ(rep.near_violations, 0u);
  EXPECT_EQ(rep.stability_violations, 0u);
  EXPECT_LE(rep.max_ratio_near, rep.near_factor);
}

TEST(LipschitzProbe, BrokenConstantsAreCaught) {
  PotentialConstants c = kGl.constants();
  c.big_m = 0.01;
  const LipschitzReport rep = lipschitz_probe(kGl.with_constants(c), 0.1, 2000, 3, {}, 2.0);
  EXPECT_GT(rep.near_violations, 0u);
}

TEST(PhiInverse, RoundTripEveryBuiltin) {
  const ProxConfig cfg;
  CounterRng rng(21, 0, 0);
  for (const char* id : {"gaussian", "ginzburg_landau", "double_well"}) {
    for (int dim : {1, 2}) {
      const Potential p = make_potential(id, dim, 1.0, 1.0, 1.0);
      for (double h : {0.001, 0.01, 0.1}) {
        for (int trial = 0; trial < 1000; ++trial) {
          Vec x(dim);
          do {
            for (int i = 0; i < dim; ++i) x[i] = 5.0 * (2 * rng.uniform() - 1);
          } while (x.norm() > 5.0);
          ASSERT_LE((phi_inverse(p, h, phi(p, h, x), cfg) - x).norm(), 10 * cfg.tol)
              << id << " dim " << dim << " h " << h;
        }
      }
    }
  }
}

TEST(PhiInverse, EnergyNeverIncreases) {
  const Potential p = make_ginzburg_landau(2, 1.0, 1.0);
  const ProxConfig cfg;
  CounterRng rng(22, 0, 0);
  for (int trial = 0; trial < 2000; ++trial) {
    const Vec x0 = rng.normal_vec(2, 4.0);
    EXPECT_LE(p.u(phi_inverse(p, 0.1, x0, cfg)), p.u(x0) + cfg.tol);
  }
}

}  // namespace
}  // namespace ilmc
