#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ilmc/parallel.hpp"
#include "ilmc/potentials.hpp"
#include "ilmc/prox.hpp"
#include "ilmc/types.hpp"

namespace ilmc {

enum class Method { kIlmc, kLmc };

Method parse_method(const std::string& name);
std::string to_string(Method m);

struct ChainConfig {
  double h = 0.01;
  std::size_t n_steps = 1000;
  std::uint64_t seed = 0;
  std::uint64_t replica_id = 0;
};

/// Coordinate magnitude beyond which a chain counts as blown up.
inline constexpr double kBlowUpGuard = 1e12;

struct Trajectory {
  std::vector<Vec> states;  ///< X at t_0, t_1, ...; a state past the guard is not stored
  bool blew_up = false;
  std::size_t blow_up_step = 0;  ///< first step index whose state crossed the guard
};

/// Drift and diffusion of the interpolated scheme at (x, tau = s - t_n).
struct SdeCoefficients {
  Vec drift;             ///< b_h(s, x)
  Mat diffusion_factor;  ///< (I + tau Hess U)^{-1}, multiplies sqrt(2) dW
  Mat lambda;            ///< diffusion_factor^2
  double tau = 0.0;
};

/// Brownian increment over [t_n, t_n + h]: N(0, h I) drawn from the
/// (seed, replica, step) stream.
Vec wiener_increment(std::uint64_t seed, std::uint64_t replica, std::uint64_t step, int dim,
                     double h);

/// One implicit step: Phi_h^{-1}(x + sqrt(2) dw).
Vec ilmc_step(const Potential& p, double h, const Vec& x, const Vec& dw,
              const ProxConfig& cfg = {});

/// One explicit Euler-Maruyama (LMC) step: x - h grad U(x) + sqrt(2) dw.
Vec lmc_step(const Potential& p, double h, const Vec& x, const Vec& dw);

/// Iterates the chosen step with increments from the replica's stream. Stops
/// early, flagging blew_up, once any coordinate exceeds kBlowUpGuard.
Trajectory run_chain(const Potential& p, const ChainConfig& cfg, Method method, const Vec& x0,
                     const ProxConfig& prox = {});

/// Coefficients of dX = b_h ds + sqrt(2) sqrt(Lambda_h) dW:
///   b_h      = -A^{-1} grad U - tau A^{-1} (D^3 U : A^{-2}),   A = I + tau Hess U
///   Lambda_h = A^{-2}
SdeCoefficients sde_coefficients(const Potential& p, const Vec& x, double tau);

/// X_s = Phi_{s - t_n}^{-1}(x_tn + sqrt(2) (W_s - W_tn)) for each offset s - t_n.
/// brownian_path[i] is W at offset s_offsets[i], relative to W_tn.
std::vector<Vec> interpolate_within_step(const Potential& p, double h, const Vec& x_tn,
                                         std::span<const Vec> brownian_path,
                                         std::span<const double> s_offsets,
                                         const ProxConfig& cfg = {});

/// Euler-Maruyama step of the explicit Ito form from tau to tau + dtau.
Vec em_explicit_sde_step(const Potential& p, const Vec& x, double tau, double dtau,
                         const Vec& dw);

// ---------------------------------------------------------------------------
// Replica kernels. Each takes an Exec policy; the serial path is the
// reference implementation the parallel one is tested against.

/// Terminal states of n_replicas independent chains of n_steps each.
std::vector<Vec> sample_terminal_states(const Potential& p, double h, Method method,
                                        const Vec& x0, std::size_t n_replicas,
                                        std::size_t n_steps, std::uint64_t seed, Exec exec,
                                        const ProxConfig& cfg = {});

struct MomentTrace {
  std::vector<std::size_t> steps;
  std::vector<double> mean;    ///< replica mean of |X_n|^4
  std::vector<double> std_error;  ///< standard error of that mean
};

/// Replica-averaged |X_n|^4 of iLMC recorded at n = first, first+every, ..., <= last.
MomentTrace fourth_moment_trace(const Potential& p, double h, const Vec& x0,
                                std::size_t n_replicas, std::size_t first, std::size_t last,
                                std::size_t every, std::uint64_t seed, Exec exec,
                                const ProxConfig& cfg = {});

struct OneStepSamples {
  std::vector<double> exact;     ///< first coordinate of Phi_h^{-1}(x + sqrt(2) W_h)
  std::vector<double> sde;    ///< first coordinate of the sub-stepped explicit SDE
};

/// For n_paths Brownian paths on [0, h] resolved into n_substeps increments,
/// returns the exact one-step iLMC value and the Euler-Maruyama solution of the
/// explicit Ito form driven by the same path.
OneStepSamples one_step_crossval(const Potential& p, double h, const Vec& x, std::size_t n_paths,
                                 std::size_t n_substeps, std::uint64_t seed, Exec exec,
                                 const ProxConfig& cfg = {});

/// Stationary samples of several iLMC chains driven by one shared Brownian path.
///
/// Level l steps with h_l = multipliers[l] * h_ref; its increments are sums of
/// multipliers[l] consecutive fine increments, so all levels see the same
/// path. Each replica runs burn_in_fine fine steps, then records every level
/// every thin_fine fine steps (both must be multiples of every multiplier).
std::vector<std::vector<double>> stationary_samples_shared_path(
    const Potential& p, double h_ref, std::span<const std::size_t> multipliers, const Vec& x0,
    std::size_t n_replicas, std::size_t samples_per_replica, std::size_t burn_in_fine,
    std::size_t thin_fine, std::uint64_t seed, Exec exec, const ProxConfig& cfg = {});

}  // namespace ilmc
