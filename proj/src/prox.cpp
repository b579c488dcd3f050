#include "ilmc/prox.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ilmc/errors.hpp"
#include "ilmc/rng.hpp"

namespace ilmc {

namespace {

// Solves J d = rhs for symmetric positive definite J.
Vec solve_spd(const Mat& j, const Vec& rhs) {
  if (j.rows() == 1) {
    if (!(j(0, 0) > 0.0)) throw SolverError("phi_inverse: Jacobian is not positive definite");
    return rhs / j(0, 0);
  }
  Eigen::LLT<Mat> llt(j);
  if (llt.info() != Eigen::Success)
    throw SolverError("phi_inverse: Jacobian is not positive definite");
  return llt.solve(rhs);
}

}  // namespace

void ProxConfig::validate() const {
  if (!(tol > 0.0)) throw ConfigError("prox: tol must be positive");
  if (max_iters < 1) throw ConfigError("prox: max_iters must be >= 1");
  if (!(damping_shrink > 0.0 && damping_shrink < 1.0))
    throw ConfigError("prox: damping_shrink must lie in (0,1)");
  if (!(h_max_fraction > 0.0 && h_max_fraction < 1.0))
    throw ConfigError("prox: h_max_fraction must lie in (0,1)");
}

double max_admissible_step(const Potential& p, const ProxConfig& cfg) {
  const double neg = p.constants().neg_curvature;
  if (neg <= 0.0) return std::numeric_limits<double>::infinity();
  return cfg.h_max_fraction / (2.0 * neg);
}

void require_admissible(const Potential& p, double h, const ProxConfig& cfg) {
  if (!(h > 0.0)) throw ConfigError("step size must be positive");
  if (!cfg.check_admissible) return;
  const double h_max = max_admissible_step(p, cfg);
  if (!(h < h_max))
    throw AdmissibilityError("step size " + std::to_string(h) + " not admissible for " +
                             p.name() + " (requires h < " + std::to_string(h_max) + ")");
}

Vec phi(const Potential& p, double h, const Vec& x) { return x + h * p.grad(x); }

double prox_objective(const Potential& p, double h, const Vec& x, const Vec& x0) {
  return p.u(x) + (x - x0).squaredNorm() / (2.0 * h);
}

Vec phi_inverse(const Potential& p, double h, const Vec& x0, const ProxConfig& cfg) {
  require_admissible(p, h, cfg);
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  const int dim = p.dim();

  Derivatives d;
  Vec x = x0;
  p.evaluate(x, 2, d);
  Vec residual = x + h * d.grad - x0;
  double res_norm = residual.norm();

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    // Roundoff floor of evaluating x + h grad U(x) - x0.
    const double floor = 16.0 * kEps * (x0.norm() + x.norm() + h * d.grad.norm());
    if (res_norm <= cfg.tol || res_norm <= floor) return x;

    Mat jac = Mat::Identity(dim, dim);
    jac.noalias() += h * d.hess;
    const Vec step = solve_spd(jac, -residual);

    double t = 1.0;
    Vec trial;
    Vec trial_res;
    double trial_norm = 0.0;
    for (;;) {
      trial = x + t * step;
      p.evaluate(trial, 2, d);
      trial_res = trial + h * d.grad - x0;
      trial_norm = trial_res.norm();
      if (std::isfinite(trial_norm) && trial_norm <= (1.0 - 1e-4 * t) * res_norm) break;
      t *= cfg.damping_shrink;
      if (t < 1e-14) break;
    }
    if (!(trial_norm < res_norm)) {
      if (res_norm <= 1e3 * floor) return x;
      throw ConvergenceError("phi_inverse: line search stalled", res_norm);
    }
    x = trial;
    residual = trial_res;
    res_norm = trial_norm;
  }
  const double floor = 16.0 * kEps * (x0.norm() + x.norm() + h * d.grad.norm());
  if (res_norm <= cfg.tol || res_norm <= floor) return x;
  throw ConvergenceError("phi_inverse: max_iters exceeded, residual " + std::to_string(res_norm),
                         res_norm);
}

LipschitzReport lipschitz_probe(const Potential& p, double h, std::size_t n_pairs,
                                std::uint64_t rng_seed, const ProxConfig& cfg, double box) {
  require_admissible(p, h, cfg);
  const auto& c = p.constants();
  const int dim = p.dim();

  LipschitzReport rep;
  rep.r_prime = (4.0 + 16.0 * c.big_m / c.m) * c.r_conf;
  rep.far_factor = std::exp(-0.25 * c.m * h);
  rep.near_factor = std::exp(2.0 * c.big_m * h);
  if (box <= 0.0) box = 1.5 * rep.r_prime;

  // Ratios are compared with a slack covering the solver tolerance.
  auto slack = [&](double sep) { return 10.0 * cfg.tol / sep + 1e-12; };

  for (std::size_t n = 0; n < n_pairs; ++n) {
    CounterRng rng(rng_seed, n, 0, StreamPurpose::kAuxiliary);
    Vec x(dim), y(dim);
    for (int i = 0; i < dim; ++i) x(i) = box * (2.0 * rng.uniform() - 1.0);
    for (int i = 0; i < dim; ++i) y(i) = box * (2.0 * rng.uniform() - 1.0);
    const double sep = (x - y).norm();
    if (sep == 0.0) continue;

    const Vec ix = phi_inverse(p, h, x, cfg);
    const Vec iy = phi_inverse(p, h, y, cfg);
    const double ratio = (ix - iy).norm() / sep;
    if (sep > rep.r_prime) {
      ++rep.n_far;
      rep.max_ratio_far = std::max(rep.max_ratio_far, ratio);
      if (ratio > rep.far_factor + slack(sep)) ++rep.far_violations;
    } else {
      ++rep.n_near;
      rep.max_ratio_near = std::max(rep.max_ratio_near, ratio);
      if (ratio > rep.near_factor + slack(sep)) ++rep.near_violations;
    }
    for (const auto& [pt, img] : {std::pair{x, ix}, std::pair{y, iy}}) {
      const double ux = p.u(pt);
      if (p.u(img) > ux + cfg.tol * (1.0 + p.grad(img).norm()) + 1e-14 * ux) ++rep.stability_violations;
    }
  }
  return rep;
}

}  // namespace ilmc
