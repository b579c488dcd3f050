#include "ilmc/fp1d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ilmc/errors.hpp"

namespace ilmc {

namespace {

// B(z) = z / (e^z - 1).
double bernoulli(double z) { return z == 0.0 ? 1.0 : z / std::expm1(z); }

std::size_t steps_for(double t, double dt, const char* what) {
  const double n = std::round(t / dt);
  if (std::abs(n * dt - t) > 1e-9 * std::max(1.0, t))
    throw ConfigError(std::string(what) + ": time is not a multiple of dt");
  return static_cast<std::size_t>(n);
}

// Backward Euler step (I - dt L) rho_new = rho_old for the tridiagonal
// finite-volume operator L built from the face coefficients.
void implicit_step(const FaceCoefficients& fc, double dt, double dx, std::vector<double>& rho,
                   std::vector<double>& scratch_c, std::vector<double>& scratch_d) {
  const std::size_t n = rho.size();
  if (n == 1) return;
  const double inv_dx2 = 1.0 / (dx * dx);
  auto alpha = [&](std::size_t f) { return fc.diffusion[f] * inv_dx2 * bernoulli(-fc.w[f]); };
  auto beta = [&](std::size_t f) { return fc.diffusion[f] * inv_dx2 * bernoulli(fc.w[f]); };

  scratch_c.resize(n);
  scratch_d.resize(n);
  // Thomas algorithm; the matrix is a column-diagonally-dominant M-matrix, so
  // every pivot is positive and positivity of rho is preserved exactly.
  double prev_alpha = 0.0;  // alpha of the face left of cell i
  double prev_beta = 0.0;   // beta of the face left of cell i
  double c_prev = 0.0;
  double d_prev = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a_right = i + 1 < n ? alpha(i) : 0.0;
    const double b_right = i + 1 < n ? beta(i) : 0.0;
    const double diag = 1.0 + dt * (a_right + prev_beta);
    const double lower = -dt * prev_alpha;
    const double upper = -dt * b_right;
    const double denom = diag - lower * c_prev;
    scratch_c[i] = upper / denom;
    scratch_d[i] = (rho[i] - lower * d_prev) / denom;
    c_prev = scratch_c[i];
    d_prev = scratch_d[i];
    prev_alpha = a_right;
    prev_beta = b_right;
  }
  rho[n - 1] = scratch_d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) rho[i] = scratch_d[i] - scratch_c[i] * rho[i + 1];
}

}  // namespace

DensityField make_initial_density(const Grid1D& grid, const Potential& p,
                                  const InitialDensitySpec& spec) {
  switch (spec.kind) {
    case InitialKind::kGibbsTempered: {
      if (!(spec.gamma > 0.0)) throw ConfigError("initial density: gamma must be positive");
      if (p.dim() != 1) throw ConfigError("initial density: potential must be one-dimensional");
      const double g = spec.gamma;
      return density_from_log_weight(grid, [&](double x) { return g * p.u(scalar_vec(x)); });
    }
    case InitialKind::kGaussian:
      return gaussian_density(grid, spec.mean, spec.variance);
    case InitialKind::kCustom:
      if (!spec.neg_log_density) throw ConfigError("initial density: custom kind needs a function");
      return density_from_log_weight(grid, spec.neg_log_density);
  }
  throw ConfigError("initial density: unknown kind");
}

LangevinFlux::LangevinFlux(const Potential& p, const Grid1D& grid) {
  if (p.dim() != 1) throw ConfigError("fp1d: potential must be one-dimensional");
  w_.resize(grid.n_cells > 0 ? grid.n_cells - 1 : 0);
  for (std::size_t f = 0; f < w_.size(); ++f)
    w_[f] = -(p.u(scalar_vec(grid.center(f + 1))) - p.u(scalar_vec(grid.center(f))));
}

void LangevinFlux::faces(std::size_t, double, FaceCoefficients& out) const {
  out.w = w_;
  out.diffusion.assign(w_.size(), 1.0);
}

IlmcFlux::IlmcFlux(const Potential& p, const Grid1D& grid, double h, double dt, double tau_scale)
    : p_(p), grid_(grid), substeps_per_h_(steps_for(h, dt, "solve_ilmc_fp")), tau_scale_(tau_scale) {
  if (p.dim() != 1) throw ConfigError("fp1d: potential must be one-dimensional");
  if (substeps_per_h_ == 0) throw ConfigError("solve_ilmc_fp: dt must not exceed h");
  du_.resize(grid.n_cells > 0 ? grid.n_cells - 1 : 0);
  for (std::size_t f = 0; f < du_.size(); ++f)
    du_[f] = p.u(scalar_vec(grid.center(f + 1))) - p.u(scalar_vec(grid.center(f)));
}

void IlmcFlux::faces(std::size_t substep, double dt, FaceCoefficients& out) const {
  const std::size_t nf = du_.size();
  out.w.resize(nf);
  out.diffusion.resize(nf);
  const double tau =
      tau_scale_ * (static_cast<double>(substep % substeps_per_h_) + 0.5) * dt;
  Derivatives d;
  for (std::size_t f = 0; f < nf; ++f) {
    p_.evaluate(scalar_vec(grid_.face(f)), 3, d);
    const double g = d.grad(0);
    const double hs = d.hess(0, 0);
    const double t3 = d.third(0, 0, 0);
    const double a = 1.0 + tau * hs;
    if (!(a > 0.0)) throw CoefficientError("solve_ilmc_fp: 1 + tau U'' is not positive");
    const double inv = 1.0 / a;
    // (b_h - Lambda_h') / Lambda_h = -U' + tau (U''' / a - U' U''); the -U'
    // part integrates exactly to -(U_{i+1} - U_i).
    out.w[f] = -du_[f] + grid_.dx * tau * (t3 * inv - g * hs);
    out.diffusion[f] = inv * inv;
  }
}

double ilmc_tau(double s, double h) { return s - h * std::floor(s / h); }

std::vector<DensityField> evolve_fp(const DensityField& rho0, std::span<const double> times,
                                    double dt, const FluxModel& model) {
  if (!(dt > 0.0)) throw ConfigError("fp1d: dt must be positive");
  const double mass0 = rho0.mass();
  std::vector<DensityField> out;
  DensityField cur = rho0;
  std::size_t done = 0;
  FaceCoefficients fc;
  std::vector<double> sc, sd;
  bool have_faces = false;
  for (double t : times) {
    if (t < rho0.time) throw ConfigError("fp1d: output times must not precede rho0.time");
    const std::size_t target = steps_for(t - rho0.time, dt, "fp1d");
    if (target < done) throw ConfigError("fp1d: output times must be nondecreasing");
    for (; done < target; ++done) {
      if (!have_faces || !model.autonomous()) {
        model.faces(done, dt, fc);
        have_faces = true;
      }
      implicit_step(fc, dt, cur.grid.dx, cur.values, sc, sd);
    }
    cur.time = t;
    if (std::abs(cur.mass() - mass0) > 1e-6)
      throw SolverError("fp1d: mass drift exceeded 1e-6");
    out.push_back(cur);
  }
  return out;
}

DensityField solve_langevin_fp(const Potential& p, const DensityField& rho0, double t_end,
                               double dt) {
  const double times[] = {rho0.time + t_end};
  return evolve_fp(rho0, times, dt, LangevinFlux(p, rho0.grid)).back();
}

DensityField solve_ilmc_fp(const Potential& p, const DensityField& rho0, double t_end, double h,
                           double dt, const ProxConfig& cfg) {
  require_admissible(p, h, cfg);
  const double times[] = {rho0.time + t_end};
  return evolve_fp(rho0, times, dt, IlmcFlux(p, rho0.grid, h, dt)).back();
}

MetricReport entropy_curve(const Potential& p, const DensityField& rho0, double t_end,
                           std::span<const double> h_list, double dt, const ProxConfig& cfg) {
  if (h_list.empty()) throw ConfigError("entropy_curve: empty h list");
  if (!(t_end > 0.0)) throw ConfigError("entropy_curve: t_end must be positive");
  for (double h : h_list) require_admissible(p, h, cfg);

  const double times[] = {rho0.time + 0.25 * t_end, rho0.time + 0.5 * t_end, rho0.time + t_end};
  const auto exact = evolve_fp(rho0, times, dt, LangevinFlux(p, rho0.grid));

  MetricReport rep;
  std::vector<double> hs, sups;
  for (double h : h_list) {
    const auto num = evolve_fp(rho0, times, dt, IlmcFlux(p, rho0.grid, h, dt));
    double sup = 0.0;
    for (std::size_t k = 0; k < num.size(); ++k) {
      const double ent = relative_entropy_grid(num[k], exact[k]);
      rep.add(h, times[k], "relative_entropy", ent);
      sup = std::max(sup, ent);
    }
    rep.add(h, times[2], "relative_entropy_sup", sup);
    // Values at roundoff level carry no rate information.
    if (sup > 1e-13) {
      hs.push_back(h);
      sups.push_back(sup);
    }
  }
  if (hs.size() >= 3) rep.slope_fits["relative_entropy_sup"] = fit_loglog_slope(hs, sups);
  return rep;
}

namespace {

// Largest W such that every cell with |x| <= W has rho > 1e-300, keeping two
// cells clear of the boundary.
double auto_window(const DensityField& f) {
  const std::size_t n = f.values.size();
  double w = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    if (f.values[i] <= 1e-300) w = std::min(w, std::abs(f.grid.center(i)) - f.grid.dx);
  const double edge = f.grid.l - 2.0 * f.grid.dx;
  return std::min(w, edge);
}

}  // namespace

TailReport tail_sandwich_check(const DensityField& rho_h, const Potential& p, double gamma,
                               double ell1, double c2, double window) {
  TailReport rep;
  rep.window = window > 0.0 ? window : auto_window(rho_h);
  const double band = 0.75 * rep.window;
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  double up_in = kNegInf, up_out = kNegInf, lo_in = kNegInf, lo_out = kNegInf;
  for (std::size_t i = 0; i < rho_h.values.size(); ++i) {
    const double x = rho_h.grid.center(i);
    const double ax = std::abs(x);
    if (ax > rep.window || rho_h.values[i] <= 1e-300) continue;
    const double log_rho = std::log(rho_h.values[i]);
    const double upper = gamma * p.u(scalar_vec(x)) + log_rho;
    const double lower = -log_rho - c2 * std::pow(ax, ell1);
    if (ax < band) {
      up_in = std::max(up_in, upper);
      lo_in = std::max(lo_in, lower);
    } else {
      up_out = std::max(up_out, upper);
      lo_out = std::max(lo_out, lower);
    }
  }
  rep.c_up = std::max(up_in, up_out);
  rep.c_lo = std::max(lo_in, lo_out);
  rep.upper_edge_excess = up_out - up_in;
  rep.lower_edge_excess = lo_out - lo_in;
  rep.upper_holds = std::isfinite(rep.c_up) && rep.upper_edge_excess <= 1e-9 * (1.0 + std::abs(up_in));
  rep.lower_holds = std::isfinite(rep.c_lo) && rep.lower_edge_excess <= 1e-9 * (1.0 + std::abs(lo_in));
  return rep;
}

GradReport gradient_bound_check(const DensityField& rho_h, double ell0, double window) {
  GradReport rep;
  rep.window = window > 0.0 ? window : auto_window(rho_h);
  const double band = 0.75 * rep.window;
  const auto& v = rho_h.values;
  const double dx = rho_h.grid.dx;
  std::vector<double> lx, lr;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    const double x = rho_h.grid.center(i);
    const double ax = std::abs(x);
    if (ax > rep.window || v[i - 1] <= 1e-300 || v[i + 1] <= 1e-300) continue;
    const double dlog = (std::log(v[i + 1]) - std::log(v[i - 1])) / (2.0 * dx);
    const double ratio = std::abs(dlog) / (1.0 + std::pow(ax, ell0));
    rep.sup_ratio = std::max(rep.sup_ratio, ratio);
    if (ax >= band && ratio > 0.0) {
      lx.push_back(std::log(ax));
      lr.push_back(std::log(ratio));
    }
  }
  if (lx.size() >= 2) rep.growth_exponent = fit_linear(lx, lr).slope;
  rep.bounded = rep.growth_exponent <= 1.0;
  return rep;
}

}  // namespace ilmc
