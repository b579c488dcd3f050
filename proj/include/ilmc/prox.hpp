#pragma once

#include <cstdint>

#include "ilmc/potentials.hpp"
#include "ilmc/types.hpp"

namespace ilmc {

struct ProxConfig {
  double tol = 1e-12;            ///< residual tolerance on |Phi_h(x) - x0|
  int max_iters = 100;
  double damping_shrink = 0.5;   ///< backtracking factor
  double h_max_fraction = 0.9;   ///< admissible h < h_max_fraction / (2 neg_curvature)
  bool check_admissible = true;

  void validate() const;
};

/// Largest admissible step, +inf for potentials without negative curvature.
double max_admissible_step(const Potential& p, const ProxConfig& cfg);

/// Throws AdmissibilityError when I + h Hess U may fail to be invertible.
void require_admissible(const Potential& p, double h, const ProxConfig& cfg);

/// Phi_h(x) = x + h grad U(x).
Vec phi(const Potential& p, double h, const Vec& x);

/// Solves Phi_h(x) = x0 by damped Newton starting at x0.
///
/// The Jacobian I + h Hess U is positive definite for admissible h, so the
/// Newton direction always decreases |F|^2 and backtracking on |F| suffices.
/// The root is the unique minimizer of U(x) + |x - x0|^2 / (2h).
Vec phi_inverse(const Potential& p, double h, const Vec& x0, const ProxConfig& cfg = {});

/// U(x) + |x - x0|^2 / (2h).
double prox_objective(const Potential& p, double h, const Vec& x, const Vec& x0);

struct LipschitzReport {
  double r_prime = 0.0;            ///< (4 + 16 M/m) R
  double far_factor = 0.0;         ///< exp(-m h / 4)
  double near_factor = 0.0;        ///< exp(2 M h)
  double max_ratio_far = 0.0;      ///< max ratio over pairs with |x - y| > R'
  double max_ratio_near = 0.0;     ///< max ratio over pairs with |x - y| <= R'
  std::size_t n_far = 0;
  std::size_t n_near = 0;
  std::size_t far_violations = 0;
  std::size_t near_violations = 0;
  std::size_t stability_violations = 0;  ///< points with U(Phi^{-1}(x)) > U(x) + slack
  bool passed() const {
    return far_violations == 0 && near_violations == 0 && stability_violations == 0;
  }
};

/// Samples pairs uniformly in the cube [-box, box]^d (box <= 0 picks 1.5 R' so
/// that both separation regimes are populated) and measures the Lipschitz
/// ratios of Phi_h^{-1} and the energy stability U(Phi_h^{-1}(x)) <= U(x).
LipschitzReport lipschitz_probe(const Potential& p, double h, std::size_t n_pairs,
                                std::uint64_t rng_seed, const ProxConfig& cfg = {},
                                double box = 0.0);

}  // namespace ilmc
