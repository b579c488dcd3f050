#include "ilmc/samplers.hpp"

#include <cmath>
#include <numeric>

#include "ilmc/errors.hpp"
#include "ilmc/rng.hpp"

namespace ilmc {

namespace {

bool exceeds_guard(const Vec& x) {
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (!(std::abs(x(i)) <= kBlowUpGuard)) return true;
  return false;
}

void check_dim(const Potential& p, const Vec& x, const char* what) {
  if (x.size() != p.dim())
    throw InputError(std::string(what) + ": state dimension does not match the potential");
}

}  // namespace

Method parse_method(const std::string& name) {
  if (name == "ilmc") return Method::kIlmc;
  if (name == "lmc") return Method::kLmc;
  throw ConfigError("unknown method '" + name + "' (expected ilmc or lmc)");
}

std::string to_string(Method m) { return m == Method::kIlmc ? "ilmc" : "lmc"; }

Vec wiener_increment(std::uint64_t seed, std::uint64_t replica, std::uint64_t step, int dim,
                     double h) {
  CounterRng rng(seed, replica, step, StreamPurpose::kIncrement);
  return rng.normal_vec(dim, h);
}

Vec ilmc_step(const Potential& p, double h, const Vec& x, const Vec& dw, const ProxConfig& cfg) {
  return phi_inverse(p, h, x + std::sqrt(2.0) * dw, cfg);
}

Vec lmc_step(const Potential& p, double h, const Vec& x, const Vec& dw) {
  return x - h * p.grad(x) + std::sqrt(2.0) * dw;
}

Trajectory run_chain(const Potential& p, const ChainConfig& cfg, Method method, const Vec& x0,
                     const ProxConfig& prox) {
  check_dim(p, x0, "run_chain");
  if (method == Method::kIlmc) require_admissible(p, cfg.h, prox);
  else if (!(cfg.h > 0.0)) throw ConfigError("run_chain: h must be positive");

  Trajectory traj;
  traj.states.reserve(cfg.n_steps + 1);
  traj.states.push_back(x0);
  Vec x = x0;
  for (std::size_t n = 0; n < cfg.n_steps; ++n) {
    const Vec dw = wiener_increment(cfg.seed, cfg.replica_id, n, p.dim(), cfg.h);
    x = method == Method::kIlmc ? ilmc_step(p, cfg.h, x, dw, prox) : lmc_step(p, cfg.h, x, dw);
    if (exceeds_guard(x)) {
      traj.blew_up = true;
      traj.blow_up_step = n + 1;
      break;
    }
    traj.states.push_back(x);
  }
  return traj;
}

SdeCoefficients sde_coefficients(const Potential& p, const Vec& x, double tau) {
  if (!(tau >= 0.0)) throw InputError("sde_coefficients: tau must be nonnegative");
  const int dim = p.dim();
  Derivatives d;
  p.evaluate(x, tau > 0.0 ? 3 : 1, d);

  SdeCoefficients c;
  c.tau = tau;
  if (tau == 0.0) {
    c.drift = -d.grad;
    c.diffusion_factor = Mat::Identity(dim, dim);
    c.lambda = Mat::Identity(dim, dim);
    return c;
  }
  if (dim == 1) {
    const double a = 1.0 + tau * d.hess(0, 0);
    if (!(a > 0.0)) throw CoefficientError("sde_coefficients: 1 + tau U'' is not positive");
    const double inv = 1.0 / a;
    const double lam = inv * inv;
    c.drift = scalar_vec(-inv * (d.grad(0) + tau * d.third(0, 0, 0) * lam));
    c.diffusion_factor = Mat::Constant(1, 1, inv);
    c.lambda = Mat::Constant(1, 1, lam);
    return c;
  }
  Mat a = Mat::Identity(dim, dim);
  a.noalias() += tau * d.hess;
  Eigen::LLT<Mat> llt(a);
  if (llt.info() != Eigen::Success)
    throw CoefficientError("sde_coefficients: I + tau Hess U is not positive definite");
  c.diffusion_factor = llt.solve(Mat::Identity(dim, dim));
  c.lambda = c.diffusion_factor * c.diffusion_factor;
  const Vec contraction = d.third.contract(c.lambda);
  c.drift = -llt.solve(d.grad + tau * contraction);
  return c;
}

std::vector<Vec> interpolate_within_step(const Potential& p, double h, const Vec& x_tn,
                                         std::span<const Vec> brownian_path,
                                         std::span<const double> s_offsets,
                                         const ProxConfig& cfg) {
  if (brownian_path.size() != s_offsets.size())
    throw InputError("interpolate_within_step: path and offsets differ in length");
  std::vector<Vec> out;
  out.reserve(s_offsets.size());
  for (std::size_t i = 0; i < s_offsets.size(); ++i) {
    const double tau = s_offsets[i];
    if (!(tau >= 0.0 && tau <= h * (1.0 + 1e-12)))
      throw InputError("interpolate_within_step: offsets must lie in [0, h]");
    const Vec shifted = x_tn + std::sqrt(2.0) * brownian_path[i];
    out.push_back(tau == 0.0 ? shifted : phi_inverse(p, tau, shifted, cfg));
  }
  return out;
}

Vec em_explicit_sde_step(const Potential& p, const Vec& x, double tau, double dtau,
                         const Vec& dw) {
  if (dtau == 0.0) return x;
  const SdeCoefficients c = sde_coefficients(p, x, tau);
  if (x.size() == 1) return scalar_vec(x(0) + c.drift(0) * dtau + std::sqrt(2.0) * c.diffusion_factor(0, 0) * dw(0));
  return x + c.drift * dtau + std::sqrt(2.0) * (c.diffusion_factor * dw);
}

std::vector<Vec> sample_terminal_states(const Potential& p, double h, Method method,
                                        const Vec& x0, std::size_t n_replicas,
                                        std::size_t n_steps, std::uint64_t seed, Exec exec,
                                        const ProxConfig& cfg) {
  check_dim(p, x0, "sample_terminal_states");
  if (method == Method::kIlmc) require_admissible(p, h, cfg);
  std::vector<Vec> out(n_replicas);
  for_each_replica(n_replicas, exec, [&](std::size_t r) {
    Vec x = x0;
    for (std::size_t n = 0; n < n_steps; ++n) {
      const Vec dw = wiener_increment(seed, r, n, p.dim(), h);
      x = method == Method::kIlmc ? ilmc_step(p, h, x, dw, cfg) : lmc_step(p, h, x, dw);
    }
    out[r] = x;
  });
  return out;
}

MomentTrace fourth_moment_trace(const Potential& p, double h, const Vec& x0,
                                std::size_t n_replicas, std::size_t first, std::size_t last,
                                std::size_t every, std::uint64_t seed, Exec exec,
                                const ProxConfig& cfg) {
  check_dim(p, x0, "fourth_moment_trace");
  require_admissible(p, h, cfg);
  if (every == 0 || last < first || n_replicas < 2)
    throw ConfigError("fourth_moment_trace: need every >= 1, last >= first, >= 2 replicas");

  MomentTrace trace;
  for (std::size_t n = first; n <= last; n += every) trace.steps.push_back(n);
  const std::size_t n_rec = trace.steps.size();
  // values[r * n_rec + k] = |X_{steps[k]}|^4 of replica r.
  std::vector<double> values(n_replicas * n_rec);
  for_each_replica(n_replicas, exec, [&](std::size_t r) {
    Vec x = x0;
    std::size_t k = 0;
    if (first == 0) {
      const double r2 = x0.squaredNorm();
      values[r * n_rec + k++] = r2 * r2;
    }
    for (std::size_t n = 1; n <= last; ++n) {
      x = ilmc_step(p, h, x, wiener_increment(seed, r, n - 1, p.dim(), h), cfg);
      if (k < n_rec && n == trace.steps[k]) {
        const double r2 = x.squaredNorm();
        values[r * n_rec + k++] = r2 * r2;
      }
    }
  });

  trace.mean.assign(n_rec, 0.0);
  trace.std_error.assign(n_rec, 0.0);
  for (std::size_t k = 0; k < n_rec; ++k) {
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t r = 0; r < n_replicas; ++r) {
      const double v = values[r * n_rec + k];
      sum += v;
      sum2 += v * v;
    }
    const double nr = static_cast<double>(n_replicas);
    const double mean = sum / nr;
    const double var = std::max(0.0, (sum2 - nr * mean * mean) / (nr - 1.0));
    trace.mean[k] = mean;
    trace.std_error[k] = std::sqrt(var / nr);
  }
  return trace;
}

OneStepSamples one_step_crossval(const Potential& p, double h, const Vec& x, std::size_t n_paths,
                                 std::size_t n_substeps, std::uint64_t seed, Exec exec,
                                 const ProxConfig& cfg) {
  check_dim(p, x, "one_step_crossval");
  require_admissible(p, h, cfg);
  if (n_substeps == 0) throw ConfigError("one_step_crossval: n_substeps must be >= 1");
  const int dim = p.dim();
  const double dtau = h / static_cast<double>(n_substeps);

  OneStepSamples out;
  out.exact.resize(n_paths);
  out.sde.resize(n_paths);
  for_each_replica(n_paths, exec, [&](std::size_t path) {
    CounterRng rng(seed, path, 0, StreamPurpose::kIncrement);
    Vec w = Vec::Zero(dim);
    Vec y = x;
    for (std::size_t k = 0; k < n_substeps; ++k) {
      const Vec dw = rng.normal_vec(dim, dtau);
      y = em_explicit_sde_step(p, y, static_cast<double>(k) * dtau, dtau, dw);
      w += dw;
    }
    out.exact[path] = ilmc_step(p, h, x, w, cfg)(0);
    out.sde[path] = y(0);
  });
  return out;
}

std::vector<std::vector<double>> stationary_samples_shared_path(
    const Potential& p, double h_ref, std::span<const std::size_t> multipliers, const Vec& x0,
    std::size_t n_replicas, std::size_t samples_per_replica, std::size_t burn_in_fine,
    std::size_t thin_fine, std::uint64_t seed, Exec exec, const ProxConfig& cfg) {
  check_dim(p, x0, "stationary_samples_shared_path");
  if (multipliers.empty()) throw ConfigError("stationary_samples_shared_path: no levels");
  for (std::size_t mult : multipliers) {
    if (mult == 0 || thin_fine % mult != 0 || burn_in_fine % mult != 0)
      throw ConfigError("stationary_samples_shared_path: burn-in and thinning must be multiples "
                        "of every level's step multiplier");
    require_admissible(p, static_cast<double>(mult) * h_ref, cfg);
  }
  if (thin_fine == 0) throw ConfigError("stationary_samples_shared_path: thin must be >= 1");

  const std::size_t n_levels = multipliers.size();
  const int dim = p.dim();
  std::vector<std::vector<double>> out(n_levels,
                                       std::vector<double>(n_replicas * samples_per_replica));
  const std::size_t total_fine = burn_in_fine + thin_fine * samples_per_replica;

  for_each_replica(n_replicas, exec, [&](std::size_t r) {
    std::vector<Vec> state(n_levels, x0);
    std::vector<Vec> accum(n_levels, Vec::Zero(dim));
    std::size_t sample = 0;
    for (std::size_t n = 1; n <= total_fine; ++n) {
      const Vec dw = wiener_increment(seed, r, n - 1, dim, h_ref);
      for (std::size_t l = 0; l < n_levels; ++l) {
        accum[l] += dw;
        if (n % multipliers[l] == 0) {
          const double h = static_cast<double>(multipliers[l]) * h_ref;
          state[l] = ilmc_step(p, h, state[l], accum[l], cfg);
          accum[l].setZero();
        }
      }
      if (n > burn_in_fine && (n - burn_in_fine) % thin_fine == 0) {
        for (std::size_t l = 0; l < n_levels; ++l)
          out[l][r * samples_per_replica + sample] = state[l](0);
        ++sample;
      }
    }
  });
  return out;
}

}  // namespace ilmc
