#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ilmc/density.hpp"
#include "ilmc/metrics.hpp"
#include "ilmc/potentials.hpp"
#include "ilmc/prox.hpp"

namespace ilmc {

enum class InitialKind { kGibbsTempered, kGaussian, kCustom };

struct InitialDensitySpec {
  InitialKind kind = InitialKind::kGibbsTempered;
  double gamma = 0.5;     ///< rho_0 proportional to exp(-gamma U)
  double mean = 0.0;      ///< kGaussian
  double variance = 1.0;  ///< kGaussian
  std::function<double(double)> neg_log_density;  ///< kCustom, unnormalized
};

DensityField make_initial_density(const Grid1D& grid, const Potential& p,
                                  const InitialDensitySpec& spec);

/// Face data of the flux J = A rho - D d(rho)/dx: D at the face and the
/// exponential-fitting exponent w ~ int (A/D) dx across the face.
struct FaceCoefficients {
  std::vector<double> w;
  std::vector<double> diffusion;
};

/// Supplies face coefficients for the sub-interval [s, s + dt].
class FluxModel {
 public:
  virtual ~FluxModel() = default;
  /// True when the coefficients do not depend on time.
  virtual bool autonomous() const = 0;
  virtual void faces(std::size_t substep, double dt, FaceCoefficients& out) const = 0;
};

/// d rho/ds = d/dx (U' rho + d rho/dx); faces use w = -(U_{i+1} - U_i) so the
/// sampled Gibbs density is an exact discrete equilibrium.
class LangevinFlux final : public FluxModel {
 public:
  LangevinFlux(const Potential& p, const Grid1D& grid);
  bool autonomous() const override { return true; }
  void faces(std::size_t substep, double dt, FaceCoefficients& out) const override;

 private:
  std::vector<double> w_;
};

/// Numerical Fokker-Planck equation of the interpolated iLMC process,
/// d rho/ds = -d/dx [(b_h - Lambda_h') rho - Lambda_h d rho/dx], with
/// tau = s - t_n restarting at every multiple of h. Coefficients of a substep
/// are evaluated at its midpoint in tau. tau_scale = 0 freezes tau at 0 and
/// reproduces LangevinFlux exactly.
class IlmcFlux final : public FluxModel {
 public:
  IlmcFlux(const Potential& p, const Grid1D& grid, double h, double dt, double tau_scale = 1.0);
  bool autonomous() const override { return tau_scale_ == 0.0; }
  void faces(std::size_t substep, double dt, FaceCoefficients& out) const override;

 private:
  Potential p_;
  Grid1D grid_;
  std::size_t substeps_per_h_;
  double tau_scale_;
  std::vector<double> du_;
};

/// tau(s) = s - h floor(s / h).
double ilmc_tau(double s, double h);

/// Advances rho0 with a positivity and mass preserving implicit finite-volume
/// scheme (backward Euler, zero-flux boundaries) and returns the field at each
/// requested time. Times must be nonnegative, nondecreasing multiples of dt.
std::vector<DensityField> evolve_fp(const DensityField& rho0, std::span<const double> times,
                                    double dt, const FluxModel& model);

DensityField solve_langevin_fp(const Potential& p, const DensityField& rho0, double t_end,
                               double dt);

/// dt must divide h.
DensityField solve_ilmc_fp(const Potential& p, const DensityField& rho0, double t_end, double h,
                           double dt, const ProxConfig& cfg = {});

/// H(rho^h_t | rho_t) at t in {T/4, T/2, T} for each h, with both densities
/// advanced from rho0 using the same dt; fits the log-log slope of the sup
/// over those times against h (metric "relative_entropy_sup").
MetricReport entropy_curve(const Potential& p, const DensityField& rho0, double t_end,
                           std::span<const double> h_list, double dt, const ProxConfig& cfg = {});

struct TailReport {
  double window = 0.0;            ///< half-width of the test window
  double c_up = 0.0;              ///< sup (gamma U + log rho)
  double c_lo = 0.0;              ///< sup (-log rho - c2 |x|^ell1)
  double upper_edge_excess = 0.0; ///< outer-band sup minus inner sup of the upper margin
  double lower_edge_excess = 0.0; ///< same for the lower margin
  bool upper_holds = false;
  bool lower_holds = false;
};

/// Tests -log rho >= gamma U - c_up and -log rho <= c2 |x|^ell1 + c_lo on the
/// window. A side "holds" when its constant is attained away from the window
/// edge, i.e. the margin does not grow towards the boundary.
TailReport tail_sandwich_check(const DensityField& rho_h, const Potential& p, double gamma,
                               double ell1, double c2 = 1.0, double window = 0.0);

struct GradReport {
  double window = 0.0;
  double sup_ratio = 0.0;        ///< sup |d log rho/dx| / (1 + |x|^ell0)
  double growth_exponent = 0.0;  ///< log-log slope of the ratio over the outer band
  bool bounded = false;          ///< growth_exponent <= 1
};

GradReport gradient_bound_check(const DensityField& rho_h, double ell0, double window = 0.0);

}  // namespace ilmc
