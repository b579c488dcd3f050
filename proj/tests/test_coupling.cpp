#include <gtest/gtest.h>
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "ilmc/coupling.hpp"
#include "ilmc/errors.hpp"
#include "ilmc/samplers.hpp"

namespace ilmc {
namespace {

const Potential kGauss = make_gaussian(1, 1.0);
const Potential kGl = make_ginzburg_landau(1, 1.0, 1.0);

TEST(Lyapunov, ClosedForm) {
  const LyapunovConfig unit{1.0, 1.0};
  EXPECT_DOUBLE_EQ(lyapunov_f(0.0, unit), 0.0);
  EXPECT_NEAR(lyapunov_f(0.5, unit), 1.0 - std::exp(-0.5), 1e-15);
  EXPECT_NEAR(lyapunov_f(2.0, unit), 1.0, 1e-15);
  EXPECT_NEAR(lyapunov_f(5.0, unit), (1 - std::exp(-1.0)) + std::exp(-1.0) * 4, 1e-14);
}

TEST(Lyapunov, ConcaveIncreasingAndComparableToIdentity) {
  const LyapunovConfig c{0.7, 2.0};
  double prev = 0.0, prev_slope = 1.0;
  for (int i = 1; i <= 100; ++i) {
    const double r = 0.05 * i;
    const double f = lyapunov_f(r, c);
    const double slope = (f - prev) / 0.05;
    EXPECT_GT(f, prev);
    EXPECT_LE(slope, prev_slope + 1e-12);
    EXPECT_LE(f, r);
    EXPECT_GE(f, std::exp(-c.c_f * c.r_f) * r);
    prev = f;
    prev_slope = slope;
  }
}

TEST(Lyapunov, Validation) {
  EXPECT_THROW((LyapunovConfig{0.0, 1.0}).validate(), ConfigError);
  EXPECT_THROW((LyapunovConfig{1.0, -1.0}).validate(), ConfigError);
  EXPECT_THROW(lyapunov_f(-1.0, LyapunovConfig{1.0, 1.0}), InputError);
}

TEST(Lyapunov, DefaultsFromConstants) {
  const LyapunovConfig d = LyapunovConfig::defaults_for(kGl);
  const auto& c = kGl.constants();
  const double r_prime = (4.0 + 16.0 * c.big_m / c.m) * c.r_conf;
  EXPECT_DOUBLE_EQ(d.r_f, 3.0 * r_prime);
  EXPECT_DOUBLE_EQ(d.c_f, 1.0 / d.r_f);
}

TEST(CoupledStep, CoalescedPairStaysTogether) {
  CoupledState s{scalar_vec(0.3), scalar_vec(0.3), true};
  CounterRng rng(1, 0, 0);
  const CoupledState out = coupled_step(kGl, 0.05, s, {}, rng);
  EXPECT_TRUE(out.coalesced);
  EXPECT_EQ(out.x, out.y);
}

TEST(CoupledStep, ReflectedSeparationIsScalarWalk) {
  // Far apart pairs never meet in one step; (1+h)(X - Y) is the pre-drift
  // separation z0 + 2 sqrt(2) W_h for the Gaussian, so its variance is 8h.
  const double h = 0.1, z0 = 50.0;
  const int n = 40000;
  double s1 = 0.0, s2 = 0.0;
  for (int r = 0; r < n; ++r) {
    CounterRng rng(2, r, 0);
    CoupledState s{scalar_vec(z0), scalar_vec(0.0), false};
    const CoupledState out = coupled_step(kGauss, h, s, {}, rng);
    ASSERT_FALSE(out.coalesced);
    const double z = (1.0 + h) * (out.x[0] - out.y[0]);
    s1 += z;
    s2 += (z - z0) * (z - z0);
  }
  EXPECT_NEAR(s1 / n, z0, 5 * std::sqrt(8 * h / n));
  EXPECT_NEAR(s2 / n, 8 * h, 5 * 8 * h * std::sqrt(2.0 / n));
}

TEST(CoupledStep, ReflectionIn2DKeepsSeparationOnTheLine) {
  const Potential p = make_gaussian(2, 1.0);
  const double h = 0.05;
  for (int r = 0; r < 200; ++r) {
    CounterRng rng(3, r, 0);
    CoupledState s{make_vec({10.0, 0.0}), make_vec({0.0, 0.0}), false};
    const CoupledState out = coupled_step(p, h, s, {}, rng);
    const Vec z = out.x - out.y;
    EXPECT_NEAR(z[1], 0.0, 1e-12);
    // X~ + Y~ moves only transversally to e, so (x + y)_1 is unchanged.
    EXPECT_NEAR((1.0 + h) * (out.x[0] + out.y[0]), 10.0, 1e-12);
  }
}

TEST(CoupledStep, DriftOnlyGaussianContractsExactly) {
  const Potential p = make_gaussian(2, 1.0);
  CouplingOptions opts;
  opts.noise_scale = 0.0;
  CounterRng rng(4, 0, 0);
  CoupledState s{make_vec({1.0, 2.0}), make_vec({-1.0, 0.5}), false};
  const double before = (s.x - s.y).norm();
  const CoupledState out = coupled_step(p, 0.1, s, opts, rng);
  EXPECT_NEAR((out.x - out.y).norm(), before / 1.1, 1e-12);
}

TEST(CoupledStep, CloseStartCoalesces) {
  CounterRng rng(5, 0, 0);
  CoupledState s{scalar_vec(1e-9), scalar_vec(0.0), false};
  const CoupledState out = coupled_step(kGl, 0.05, s, {}, rng);
  EXPECT_TRUE(out.coalesced);
  EXPECT_EQ(out.x, out.y);
}

// Hitting probability of 0 by time t for z0 + sqrt(8) W: 2 Phi(-z0 / sqrt(8 t)).
TEST(CoupledStep, MeetingProbabilityMatchesReflectionPrinciple) {
  const double h = 0.05, z0 = 0.3;
  const int n = 40000;
  int met = 0;
  for (int r = 0; r < n; ++r) {
    CounterRng rng(6, r, 0);
    CoupledState s{scalar_vec(z0), scalar_vec(0.0), false};
    met += coupled_step(kGauss, h, s, {}, rng).coalesced ? 1 : 0;
  }
  const double expect = std::erfc(z0 / std::sqrt(8 * h) / std::sqrt(2.0));
  const double se = std::sqrt(expect * (1 - expect) / n);
  EXPECT_NEAR(static_cast<double>(met) / n, expect, 5 * se);
}

TEST(EstimateContraction, DriftOnlyGaussianRate) {
  CouplingOptions opts;
  opts.noise_scale = 0.0;
  const double h = 0.1;
  const LyapunovConfig linear{1e-12, 1.0};
  const auto rep = estimate_contraction(kGauss, h, 50, 3, 2.0, linear, 1, opts, Exec::kSerial);
  EXPECT_NEAR(rep.rate, std::log1p(h) / h, 1e-6);
  EXPECT_NEAR(rep.r_squared, 1.0, 1e-9);
  for (std::size_t n = 0; n < rep.rows.size(); ++n)
    EXPECT_NEAR(rep.rows[n].mean_f, 2.0 * std::pow(1.0 + h, -static_cast<double>(n)), 1e-9);
}

TEST(EstimateContraction, GinzburgLandauContracts) {
  const auto rep = estimate_contraction(kGl, 0.05, 100, 2000, 2.0,
                                        LyapunovConfig::defaults_for(kGl), 7);
  EXPECT_FALSE(rep.degenerate);
  EXPECT_GT(rep.rate, 0.0);
  EXPECT_GE(rep.r_squared, 0.9);
  for (std::size_t n = 1; n < rep.rows.size(); ++n)
    EXPECT_GE(rep.rows[n].coalesced_frac, rep.rows[n - 1].coalesced_frac);
}

TEST(EstimateContraction, SerialParallelParity) {
  const int saved = omp_get_max_threads();
  omp_set_num_threads(3);
  const auto lyap = LyapunovConfig::defaults_for(kGl);
  const auto a = estimate_contraction(kGl, 0.05, 30, 100, 2.0, lyap, 3, {}, Exec::kSerial);
  const auto b = estimate_contraction(kGl, 0.05, 30, 100, 2.0, lyap, 3, {}, Exec::kParallel);
  omp_set_num_threads(saved);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].mean_f, b.rows[i].mean_f);
    EXPECT_EQ(a.rows[i].coalesced_frac, b.rows[i].coalesced_frac);
  }
  EXPECT_EQ(a.rate, b.rate);
}

TEST(EstimateContraction, Validation) {
  const auto lyap = LyapunovConfig::defaults_for(kGl);
  EXPECT_THROW(estimate_contraction(kGl, 0.05, 10, 0, 2.0, lyap, 1), ConfigError);
  EXPECT_THROW(estimate_contraction(kGl, 0.05, 0, 10, 2.0, lyap, 1), ConfigError);
  EXPECT_THROW(estimate_contraction(kGl, 0.05, 10, 10, 0.0, lyap, 1), ConfigError);
  EXPECT_THROW(estimate_contraction(kGl, 0.5, 10, 10, 2.0, lyap, 1), AdmissibilityError);
}

TEST(WfEmpirical, Examples) {
  const LyapunovConfig linear{1e-12, 1.0};
  const std::vector<Vec> a = {scalar_vec(0.0), scalar_vec(2.0)};
  const std::vector<Vec> b = {scalar_vec(3.0), scalar_vec(1.0)};
  EXPECT_DOUBLE_EQ(wf_empirical(a, a, linear), 0.0);
  EXPECT_NEAR(wf_empirical(a, b, linear), 1.0, 1e-9);
  const std::vector<Vec> s0 = {scalar_vec(0.0)}, s5 = {scalar_vec(5.0)};
  EXPECT_NEAR(wf_empirical(s0, s5, LyapunovConfig{1.0, 1.0}), 2.103638323514327, 1e-12);
}

TEST(WfEmpirical, HungarianMatchesBruteForceIn2D) {
  const LyapunovConfig lyap{0.5, 1.5};
  CounterRng rng(8, 0, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 6;
    std::vector<Vec> xs, ys;
    for (std::size_t i = 0; i < n; ++i) {
      xs.push_back(rng.normal_vec(2, 1.0));
      ys.push_back(rng.normal_vec(2, 2.0));
    }
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = 1e300;
    do {
      double c = 0.0;
      for (std::size_t i = 0; i < n; ++i) c += lyapunov_f((xs[i] - ys[perm[i]]).norm(), lyap);
      best = std::min(best, c / n);
    } while (std::next_permutation(perm.begin(), perm.end()));
    EXPECT_NEAR(wf_empirical(xs, ys, lyap), best, 1e-12);
  }
}

TEST(SolveAssignment, SmallMatrix) {
  const std::vector<double> cost = {4, 1, 3, 2, 0, 5, 3, 2, 2};
  const auto a = solve_assignment(cost, 3);
  double total = 0.0;
  for (std::size_t i = 0; i < 3; ++i) total += cost[i * 3 + a[i]];
  EXPECT_DOUBLE_EQ(total, 5.0);
  std::vector<std::size_t> sorted = a;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(WfEmpirical, Validation) {
  const LyapunovConfig lyap{1.0, 1.0};
  const std::vector<Vec> a = {scalar_vec(0.0)}, b = {scalar_vec(0.0), scalar_vec(1.0)};
  EXPECT_THROW(wf_empirical(a, b, lyap), InputError);
}

// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

TEST(CoupledStep, BothMarginalsAreOneIlmcStep) {
  const double h = 0.05;
  const Vec x0 = scalar_vec(0.5), y0 = scalar_vec(-0.4);
  const std::size_t n = 100000;
  std::vector<double> cx(n), cy(n), px(n), py(n);
  for (std::size_t r = 0; r < n; ++r) {
    CounterRng rng(31, r, 0);
    const CoupledState out = coupled_step(kGl, h, {x0, y0, false}, {}, rng);
    cx[r] = out.x[0];
    cy[r] = out.y[0];
    px[r] = ilmc_step(kGl, h, x0, wiener_increment(32, r, 0, 1, h))[0];
    py[r] = ilmc_step(kGl, h, y0, wiener_increment(33, r, 0, 1, h))[0];
  }
  const double crit = 1.628 * std::sqrt(2.0 / n);  // 1% level
  EXPECT_LT(ks_statistic(cx, px), crit);
  EXPECT_LT(ks_statistic(cy, py), crit);
}

TEST(CoupledStep, AbsorptionIsPermanent) {
  CoupledState s{scalar_vec(0.2), scalar_vec(0.0), false};
  bool met = false;
  for (std::uint64_t n = 0; n < 2000; ++n) {
    CounterRng rng(34, 0, n);
    s = coupled_step(kGl, 0.05, s, {}, rng);
    if (met) {
      ASSERT_TRUE(s.coalesced);
      ASSERT_EQ(s.x, s.y);
    }
    met = met || s.coalesced;
  }
  EXPECT_TRUE(met);
}

// A nearly flat potential leaves only the diffusion stage: E f(|Z|) must not
// increase (f is concave and |Z| is a martingale stopped at 0).
TEST(CoupledStep, DiffusionStageLyapunovMeanDecreases) {
  const Potential flat = make_gaussian(1, 1e-12);
  const LyapunovConfig lyap{0.5, 2.0};
  const std::size_t n = 20000, steps = 20;
  std::vector<CoupledState> st(n, CoupledState{scalar_vec(1.0), scalar_vec(0.0), false});
  double prev = lyapunov_f(1.0, lyap);
  for (std::size_t k = 0; k < steps; ++k) {
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      CounterRng rng(35, r, k);
      st[r] = coupled_step(flat, 0.05, st[r], {}, rng);
      const double f = lyapunov_f(std::abs(st[r].x[0] - st[r].y[0]), lyap);
      s1 += f;
      s2 += f * f;
    }
    const double mean = s1 / n;
    const double se = std::sqrt(std::max(0.0, s2 / n - mean * mean) / n);
    EXPECT_LE(mean, prev + 2 * se) << "step " << k;
    prev = mean;
  }
}

// The along-e martingale zeta over one step has variance h, so
// P(|zeta| >= a) <= 2 exp(-a^2 / (2h)).
TEST(CoupledStep, SubGaussianIncrement) {
  const Potential flat = make_gaussian(1, 1e-12);
  const double h = 0.05, z0 = 100.0;
  const std::size_t n = 100000;
  std::vector<double> zeta(n);
  for (std::size_t r = 0; r < n; ++r) {
    CounterRng rng(36, r, 0);
    const CoupledState out = coupled_step(flat, h, {scalar_vec(z0), scalar_vec(0.0), false}, {}, rng);
    zeta[r] = ((out.x[0] - out.y[0]) * (1.0 + 1e-12 * h) - z0) / (2.0 * std::sqrt(2.0));
  }
  for (double k : {2.0, 3.0}) {
    const double a = k * std::sqrt(h);
    double frac = 0.0;
    for (double z : zeta) frac += std::abs(z) >= a ? 1.0 : 0.0;
    frac /= n;
    const double bound = 2.0 * std::exp(-a * a / (2 * h));
    EXPECT_LE(frac, bound + 3 * std::sqrt(bound / n)) << "a = " << k << " sqrt(h)";
  }
}

}  // namespace
}  // namespace ilmc
