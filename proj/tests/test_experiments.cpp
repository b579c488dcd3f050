#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ilmc/errors.hpp"
#include "ilmc/experiments.hpp"

namespace ilmc {
namespace {

ExperimentConfig resolve(const std::string& name, std::initializer_list<const char*> sets) {
  KeyValueConfig kv;
  for (const char* s : sets) kv.apply_override(s);
  return resolve_experiment_config(name, kv);
}

std::string csv(const ExperimentResult& r, const ExperimentConfig& cfg) {
  std::ostringstream os;
  r.write_csv(os, cfg);
  return os.str();
}

TEST(ExperimentConfig, DefaultsPerExperiment) {
  const auto e = resolve("entropy_rate", {});
  EXPECT_EQ(e.potential_id, "ginzburg_landau");
  EXPECT_EQ(e.h_list, (std::vector<double>{0.2, 0.1, 0.05, 0.025}));
  const auto w = resolve("w1_rate", {});
  EXPECT_EQ(w.replicas, 2000u);
  const auto s = resolve("stability", {});
  EXPECT_DOUBLE_EQ(s.b, 0.0);
  EXPECT_EQ(s.h_list, std::vector<double>{0.5});
  EXPECT_EQ(resolve("ergodicity", {"seed=9"}).seed, 9u);
}

TEST(ExperimentConfig, Validation) {
  EXPECT_THROW(resolve("entropy_rate", {"h_list="}), ConfigError);
  EXPECT_THROW(resolve("ergodicity", {"replicas=0"}), ConfigError);
  EXPECT_THROW(resolve("w1_rate", {"h_list=0.1,-0.1"}), ConfigError);
  EXPECT_THROW(resolve("banana", {}), ConfigError);
  EXPECT_THROW(resolve("w1_rate", {"potential=nope"}), ConfigError);
  EXPECT_THROW(resolve("w1_rate", {"prox_tol=0"}), ConfigError);
}

TEST(ExperimentConfig, DescribeIsSortedAndComplete) {
  const auto cfg = resolve("crossval", {"x0=0.5"});
  const auto lines = cfg.describe();
  ASSERT_FALSE(lines.empty());
  EXPECT_EQ(lines.front(), "experiment=crossval");
  EXPECT_TRUE(std::is_sorted(lines.begin() + 1, lines.end()));
  EXPECT_NE(std::find(lines.begin(), lines.end(), "x0=0.5"), lines.end());
}

TEST(GaussianStationaryVariance, FixedPointOfRecursion) {
  for (double h : {0.01, 0.1, 1.0}) {
    const double s = gaussian_ilmc_stationary_variance(1.0, h);
    EXPECT_NEAR(s, (s + 2 * h) / ((1 + h) * (1 + h)), 1e-15);
    EXPECT_NEAR(s, 2.0 / (2.0 + h), 1e-15);
  }
  const double s3 = gaussian_ilmc_stationary_variance(3.0, 0.1);
  EXPECT_NEAR(s3, (s3 + 0.2) / (1.3 * 1.3), 1e-15);
}

TEST(EntropyRate, GaussianAnalyticShortcut) {
  const auto cfg = resolve("entropy_rate", {"mode=analytic", "potential=gaussian"});
  const auto res = run_entropy_rate(cfg);
  EXPECT_TRUE(res.passed);
  const double slope = res.report.slope_fits.at("stationary_kl_analytic").slope;
  EXPECT_GE(slope, 1.9);
  EXPECT_LE(slope, 2.1);
  EXPECT_THROW(run_entropy_rate(resolve("entropy_rate", {"mode=analytic"})), ConfigError);
}

TEST(W1Rate, GaussianClosedForm) {
  const auto cfg = resolve("w1_rate", {"potential=gaussian"});
  const auto res = run_w1_stationary_rate(cfg);
  EXPECT_TRUE(res.passed);
  for (const auto& row : res.report.rows) {
    const double sd = std::sqrt(2.0 / (2.0 + row.h));
    EXPECT_NEAR(row.value, std::sqrt(2.0 / M_PI) * (1.0 - sd), 1e-15);
    EXPECT_NEAR(row.value, std::sqrt(2.0 / M_PI) * row.h / 4, 0.1 * row.value);
  }
}

TEST(W1Rate, SingleStepSizeEmitsValueWithoutFit) {
  const auto cfg = resolve("w1_rate", {"h_list=0.1", "replicas=20", "samples=10"});
  const auto res = run_w1_stationary_rate(cfg);
  EXPECT_TRUE(res.report.slope_fits.empty());
  ASSERT_EQ(res.report.select("w1").size(), 1u);
  EXPECT_GT(res.report.rows.front().value, 0.0);
}

TEST(W1Rate, MisalignedStepSizesRejected) {
  EXPECT_THROW(run_w1_stationary_rate(resolve("w1_rate", {"h_list=0.1,0.07", "replicas=4"})),
               ConfigError);
}

TEST(Ergodicity, DriftOnlyGaussianRate) {
  const auto cfg = resolve("ergodicity", {"potential=gaussian", "drift_only=1", "replicas=2",
                                          "cf=1e-12", "rf=1", "t_max=2"});
  const auto res = run_ergodicity(cfg);
  EXPECT_TRUE(res.passed);
  ASSERT_EQ(res.contraction.size(), 2u);
  for (const auto& c : res.contraction) EXPECT_NEAR(c.rate, std::log1p(c.h) / c.h, 1e-6);
}

TEST(Stability, ContrastAndDeterminism) {
  const auto cfg = resolve("stability", {});
  const auto a = run_stability_demo(cfg);
  EXPECT_TRUE(a.passed);
  EXPECT_TRUE(a.lmc_blew_up);
  EXPECT_LE(a.lmc_blow_up_step, 50u);
  EXPECT_LE(a.ilmc_max_abs, 5.0);
  const auto b = run_stability_demo(cfg);
  EXPECT_EQ(csv(a, cfg), csv(b, cfg));
}

TEST(Crossval, GaussianGapIsSmall) {
  const auto cfg = resolve("crossval", {"potential=gaussian", "replicas=20000"});
  const auto res = run_crossval(cfg);
  EXPECT_TRUE(res.passed);
  const auto gaps = res.report.select("w1_gap");
  ASSERT_EQ(gaps.size(), 3u);
  EXPECT_LE(gaps.back().value, 0.005);
  EXPECT_EQ(res.report.select("grid_coincidence").front().value, 0.0);
}

TEST(RunExperiment, CsvCarriesResolvedConfig) {
  const auto cfg = resolve("entropy_rate", {"mode=analytic", "potential=gaussian"});
  const std::string text = csv(run_experiment(cfg), cfg);
  EXPECT_NE(text.find("# config experiment=entropy_rate\n"), std::string::npos);
  EXPECT_NE(text.find("# config potential=gaussian\n"), std::string::npos);
  EXPECT_NE(text.find("# result pass\n"), std::string::npos);
  EXPECT_NE(text.find("h,t,metric,value,stderr\n"), std::string::npos);
  EXPECT_EQ(text, csv(run_experiment(cfg), cfg));
}

}  // namespace
}  // namespace ilmc
