#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ilmc/parallel.hpp"
#include "ilmc/potentials.hpp"
#include "ilmc/prox.hpp"
#include "ilmc/rng.hpp"
#include "ilmc/types.hpp"

namespace ilmc {

/// Parameters of f(r) = int_0^r exp(-c_f min(s, r_f)) ds.
struct LyapunovConfig {
  double c_f = 1.0;
  double r_f = 1.0;

  void validate() const;
  /// r_f = 3 R' and c_f = 1 / r_f, with R' = (4 + 16 M/m) R.
  static LyapunovConfig defaults_for(const Potential& p);
};

double lyapunov_f(double r, const LyapunovConfig& cfg);

struct CoupledState {
  Vec x;
  Vec y;
  bool coalesced = false;
};

struct CouplingOptions {
  std::size_t n_substeps = 16;
  /// Coalescence threshold on |X~ - Y~|; <= 0 picks 1e-6 sqrt(h).
  double eps_coalesce = 0.0;
  /// Scales the Brownian increments; 0 gives the drift-only diagnostic.
  double noise_scale = 1.0;
  /// Sample the hitting of 0 between substeps from the Brownian-bridge law.
  bool bridge_correction = true;
};

/// One step of the reflection coupling: a diffusion stage in which Y~
/// receives the mirrored increments (I - 2 e e^T) xi until the pair meets,
/// followed by the deterministic map Phi_h^{-1} applied to both.
CoupledState coupled_step(const Potential& p, double h, const CoupledState& state,
                          const CouplingOptions& opts, CounterRng& rng,
                          const ProxConfig& cfg = {});

struct ContractionRow {
  std::size_t step = 0;
  double t = 0.0;
  double mean_f = 0.0;
  double coalesced_frac = 0.0;
  double std_error = 0.0;
};

struct ContractionReport {
  double h = 0.0;
  std::vector<ContractionRow> rows;
  double rate = 0.0;  ///< C in E f(|Z_n|) ~ exp(alpha - C n h)
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t fit_points = 0;
  bool degenerate = false;
};

/// Runs n_replicas coupled pairs from X_0 = x0, Y_0 = x0 + z0 e_1 and fits the
/// exponential decay of the replica mean of f(|Z_n|) over the steps where that
/// mean is still at least 10 standard errors above zero.
ContractionReport estimate_contraction(const Potential& p, double h, std::size_t n_steps,
                                       std::size_t n_replicas, double z0,
                                       const LyapunovConfig& lyap, std::uint64_t seed,
                                       const CouplingOptions& opts = {}, Exec exec = Exec::kParallel,
                                       const ProxConfig& cfg = {});

/// min over permutations of (1/N) sum f(|x_i - y_sigma(i)|); sorted matching in
/// 1D, Hungarian assignment otherwise (N <= 4096).
double wf_empirical(std::span<const Vec> xs, std::span<const Vec> ys, const LyapunovConfig& lyap);

/// Minimum-cost perfect matching for a dense n x n cost matrix (row-major).
/// Returns assignment[row] = column.
std::vector<std::size_t> solve_assignment(std::span<const double> cost, std::size_t n);

}  // namespace ilmc
