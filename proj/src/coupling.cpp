#include "ilmc/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ilmc/errors.hpp"
#include "ilmc/metrics.hpp"

namespace ilmc {

void LyapunovConfig::validate() const {
  if (!(c_f > 0.0) || !(r_f > 0.0)) throw ConfigError("lyapunov: c_f and r_f must be positive");
}

LyapunovConfig LyapunovConfig::defaults_for(const Potential& p) {
  const auto& c = p.constants();
  const double r_prime = (4.0 + 16.0 * c.big_m / c.m) * c.r_conf;
  LyapunovConfig l;
  l.r_f = 3.0 * r_prime;
  l.c_f = 1.0 / l.r_f;
  return l;
}

double lyapunov_f(double r, const LyapunovConfig& cfg) {
  if (!(r >= 0.0)) throw InputError("lyapunov_f: r must be nonnegative");
  if (r <= cfg.r_f) return -std::expm1(-cfg.c_f * r) / cfg.c_f;
  return -std::expm1(-cfg.c_f * cfg.r_f) / cfg.c_f + std::exp(-cfg.c_f * cfg.r_f) * (r - cfg.r_f);
}

CoupledState coupled_step(const Potential& p, double h, const CoupledState& state,
                          const CouplingOptions& opts, CounterRng& rng, const ProxConfig& cfg) {
  if (opts.n_substeps == 0) throw ConfigError("coupled_step: n_substeps must be >= 1");
  const int dim = p.dim();
  const double dt = h / static_cast<double>(opts.n_substeps);
  const double eps = opts.eps_coalesce > 0.0 ? opts.eps_coalesce : 1e-6 * std::sqrt(h);
  const double sqrt2 = std::sqrt(2.0);

  Vec xt = state.x;
  Vec yt = state.y;
  bool coalesced = state.coalesced;
  // In the reflected motion Z~ = X~ - Y~ stays on the line spanned by e, so
  // its length performs a 1D Brownian motion with variance 8 per unit time.
  for (std::size_t k = 0; k < opts.n_substeps; ++k) {
    const Vec xi = opts.noise_scale * rng.normal_vec(dim, dt);
    if (coalesced) {
      xt += sqrt2 * xi;
      yt = xt;
      continue;
    }
    const Vec z = xt - yt;
    xt += sqrt2 * xi;
    const double z_old = z.norm();
    if (z_old <= eps) {
      yt = xt;
      coalesced = true;
      continue;
    }
    const Vec e = z / z_old;
    const double along = e.dot(xi);
    yt += sqrt2 * (xi - 2.0 * along * e);
    const double z_new = z_old + 2.0 * sqrt2 * along;
    bool hit = z_new <= eps;
    if (!hit && opts.bridge_correction && opts.noise_scale > 0.0) {
      const double var = 8.0 * dt * opts.noise_scale * opts.noise_scale;
      hit = rng.uniform() < std::exp(-2.0 * z_old * z_new / var);
    }
    if (hit) {
      yt = xt;
      coalesced = true;
    }
  }

  CoupledState out;
  out.x = phi_inverse(p, h, xt, cfg);
  out.y = coalesced ? out.x : phi_inverse(p, h, yt, cfg);
  out.coalesced = coalesced;
  return out;
}

ContractionReport estimate_contraction(const Potential& p, double h, std::size_t n_steps,
                                       std::size_t n_replicas, double z0,
                                       const LyapunovConfig& lyap, std::uint64_t seed,
                                       const CouplingOptions& opts, Exec exec,
                                       const ProxConfig& cfg) {
  require_admissible(p, h, cfg);
  lyap.validate();
  if (n_replicas == 0) throw ConfigError("estimate_contraction: need at least one replica");
  if (n_steps == 0) throw ConfigError("estimate_contraction: need at least one step");
  if (!(z0 > 0.0)) throw ConfigError("estimate_contraction: z0 must be positive");

  const int dim = p.dim();
  const std::size_t stride = n_steps + 1;
  std::vector<double> fvals(n_replicas * stride);
  std::vector<unsigned char> joined(n_replicas * stride);

  for_each_replica(n_replicas, exec, [&](std::size_t r) {
    CoupledState s;
    s.x = Vec::Zero(dim);
    s.y = s.x;
    s.y(0) += z0;
    fvals[r * stride] = lyapunov_f(z0, lyap);
    joined[r * stride] = 0;
    for (std::size_t n = 0; n < n_steps; ++n) {
      CounterRng rng(seed, r, n, StreamPurpose::kIncrement);
      s = coupled_step(p, h, s, opts, rng, cfg);
      fvals[r * stride + n + 1] = lyapunov_f((s.x - s.y).norm(), lyap);
      joined[r * stride + n + 1] = s.coalesced ? 1 : 0;
    }
  });

  ContractionReport rep;
  rep.h = h;
  const double nr = static_cast<double>(n_replicas);
  for (std::size_t n = 0; n <= n_steps; ++n) {
    double sum = 0.0, sum2 = 0.0, frac = 0.0;
    for (std::size_t r = 0; r < n_replicas; ++r) {
      const double v = fvals[r * stride + n];
      sum += v;
      sum2 += v * v;
      frac += joined[r * stride + n];
    }
    ContractionRow row;
    row.step = n;
    row.t = static_cast<double>(n) * h;
    row.mean_f = sum / nr;
    const double var = n_replicas > 1 ? std::max(0.0, (sum2 - nr * row.mean_f * row.mean_f) / (nr - 1.0)) : 0.0;
    row.std_error = std::sqrt(var / nr);
    row.coalesced_frac = frac / nr;
    rep.rows.push_back(row);
  }

  std::vector<double> ts, logs;
  for (const auto& row : rep.rows) {
    if (!(row.mean_f > 0.0) || row.mean_f < 10.0 * row.std_error) break;
    ts.push_back(row.t);
    logs.push_back(std::log(row.mean_f));
  }
  rep.fit_points = ts.size();
  if (ts.size() < 3) {
    rep.degenerate = true;
    return rep;
  }
  const LinearFit fit = fit_linear(ts, logs);
  rep.rate = -fit.slope;
  rep.intercept = fit.intercept;
  rep.r_squared = fit.r_squared;
  rep.degenerate = !(rep.rate > 0.0);
  return rep;
}

double wf_empirical(std::span<const Vec> xs, std::span<const Vec> ys, const LyapunovConfig& lyap) {
  const std::size_t n = xs.size();
  if (n != ys.size() || n == 0) throw InputError("wf_empirical: sample counts must match");
  if (n > 4096) throw InputError("wf_empirical: at most 4096 samples supported");
  const int dim = static_cast<int>(xs.front().size());

  if (dim == 1) {
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = xs[i](0);
      b[i] = ys[i](0);
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += lyapunov_f(std::abs(a[i] - b[i]), lyap);
    return s / static_cast<double>(n);
  }

  std::vector<double> cost(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = lyapunov_f((xs[i] - ys[j]).norm(), lyap);
  const auto assign = solve_assignment(cost, n);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += cost[i * n + assign[i]];
  return s / static_cast<double>(n);
}

std::vector<std::size_t> solve_assignment(std::span<const double> cost, std::size_t n) {
  if (cost.size() != n * n) throw InputError("solve_assignment: cost matrix must be n x n");
  // Shortest augmenting path Hungarian method with potentials, 1-based.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assignment(n);
  for (std::size_t j = 1; j <= n; ++j) assignment[match[j] - 1] = j - 1;
  return assignment;
}

}  // namespace ilmc
