#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "ilmc/config.hpp"
#include "ilmc/coupling.hpp"
#include "ilmc/metrics.hpp"
#include "ilmc/parallel.hpp"
#include "ilmc/potentials.hpp"
#include "ilmc/prox.hpp"

namespace ilmc {

/// Pass windows for the fitted rates.
inline constexpr double kEntropySlopeMin = 1.7;
inline constexpr double kEntropySlopeMax = 2.3;
inline constexpr double kW1SlopeMin = 0.7;
inline constexpr double kW1SlopeMax = 1.3;
inline constexpr double kContractionMinR2 = 0.9;
inline constexpr double kContractionRateSpread = 0.3;

/// Resolved settings of one experiment run. `params` holds every key
/// (defaults included) so it can be echoed into the CSV header.
struct ExperimentConfig {
  std::string name;
  std::string potential_id;
  int dim = 1;
  double kappa = 1.0;
  double a = 1.0;
  double b = 1.0;
  std::vector<double> h_list;
  std::size_t replicas = 1;
  std::uint64_t seed = 1;
  std::string output_path;
  ProxConfig prox;
  KeyValueConfig params;

  Potential potential() const;
  /// "key=value" lines of the resolved configuration, sorted by key.
  std::vector<std::string> describe() const;
};

std::vector<std::string> experiment_names();

/// Fills in experiment-specific defaults and validates the common fields.
ExperimentConfig resolve_experiment_config(const std::string& name, const KeyValueConfig& kv);

struct ExperimentResult {
  MetricReport report;
  bool passed = false;
  std::vector<std::string> messages;

  /// The resolved config as header comments, then the report.
  void write_csv(std::ostream& os, const ExperimentConfig& cfg) const;
};

/// Relative entropy rate from the two Fokker-Planck solvers (mode=pde) or the
/// closed-form stationary Gaussian divergence (mode=analytic).
ExperimentResult run_entropy_rate(const ExperimentConfig& cfg, Exec exec = Exec::kParallel);

/// Stationary W1 against a reference chain at min(h)/8, or the closed form
/// for Gaussian potentials (mode=analytic).
ExperimentResult run_w1_stationary_rate(const ExperimentConfig& cfg, Exec exec = Exec::kParallel);

struct ErgodicityResult : ExperimentResult {
  std::vector<ContractionReport> contraction;
};

ErgodicityResult run_ergodicity(const ExperimentConfig& cfg, Exec exec = Exec::kParallel);

struct StabilityResult : ExperimentResult {
  bool lmc_blew_up = false;
  std::size_t lmc_blow_up_step = 0;
  double ilmc_max_abs = 0.0;
};

/// LMC and iLMC from the same start with the same noise stream.
StabilityResult run_stability_demo(const ExperimentConfig& cfg, Exec exec = Exec::kParallel);

/// One-step law of iLMC against the sub-stepped explicit Ito form.
ExperimentResult run_crossval(const ExperimentConfig& cfg, Exec exec = Exec::kParallel);

ExperimentResult run_experiment(const ExperimentConfig& cfg, Exec exec = Exec::kParallel);

/// Closed-form stationary variance of iLMC on kappa |x|^2 / 2.
double gaussian_ilmc_stationary_variance(double kappa, double h);

}  // namespace ilmc
