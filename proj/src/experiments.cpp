#include "ilmc/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ilmc/errors.hpp"
#include "ilmc/fp1d.hpp"
#include "ilmc/samplers.hpp"

namespace ilmc {

namespace {

struct Defaults {
  const char* key;
  const char* value;
};

const std::vector<Defaults>& defaults_for(const std::string& name) {
  static const std::vector<Defaults> entropy = {
      {"h_list", "0.2,0.1,0.05,0.025"}, {"gamma", "0.5"},    {"t_end", "1"},
      {"cells", "1200"},                {"domain_l", "3"},   {"dt_divisor", "64"},
      {"mode", "pde"},                  {"replicas", "1"}};
  static const std::vector<Defaults> w1 = {{"h_list", "0.2,0.1,0.05"},
                                           {"replicas", "2000"},
                                           {"samples", "100"},
                                           {"x0", "0"},
                                           {"mode", "auto"}};
  static const std::vector<Defaults> ergodicity = {
      {"h_list", "0.05,0.025"}, {"replicas", "10000"}, {"z0", "2"},
      {"t_max", "10"},          {"substeps", "16"},    {"drift_only", "0"}};
  static const std::vector<Defaults> stability = {
      {"b", "0"}, {"h_list", "0.5"}, {"x0", "10"}, {"steps", "10000"}, {"replicas", "1"}};
  static const std::vector<Defaults> crossval = {{"h_list", "0.1"},
                                                 {"x0", "1"},
                                                 {"replicas", "100000"},
                                                 {"substeps_list", "10,100,1000"},
                                                 {"gap_tol", "0.01"}};
  if (name == "entropy_rate") return entropy;
  if (name == "w1_rate") return w1;
  if (name == "ergodicity") return ergodicity;
  if (name == "stability") return stability;
  if (name == "crossval") return crossval;
  throw ConfigError("unknown experiment '" + name + "'");
}

std::size_t gcd(std::size_t a, std::size_t b) { return b == 0 ? a : gcd(b, a % b); }
std::size_t lcm(std::size_t a, std::size_t b) { return a / gcd(a, b) * b; }

std::size_t round_up(std::size_t v, std::size_t multiple) {
  return (v + multiple - 1) / multiple * multiple;
}

bool in_window(double v, double lo, double hi) { return v >= lo && v <= hi; }

std::string fmt(double v) { return format_number(v); }

}  // namespace

double gaussian_ilmc_stationary_variance(double kappa, double h) {
  // sigma^2 = (sigma^2 + 2h) / (1 + kappa h)^2.
  return 2.0 / (kappa * (2.0 + kappa * h));
}

std::vector<std::string> experiment_names() {
  return {"entropy_rate", "w1_rate", "ergodicity", "stability", "crossval"};
}

Potential ExperimentConfig::potential() const {
  return make_potential(potential_id, dim, kappa, a, b);
}

std::vector<std::string> ExperimentConfig::describe() const {
  std::vector<std::string> out;
  out.push_back("experiment=" + name);
  for (const auto& [k, v] : params.values()) out.push_back(k + "=" + v);
  return out;
}

ExperimentConfig resolve_experiment_config(const std::string& name, const KeyValueConfig& kv) {
  KeyValueConfig merged;
  merged.set("potential", "ginzburg_landau");
  merged.set("dim", "1");
  merged.set("kappa", "1");
  merged.set("a", "1");
  merged.set("b", "1");
  merged.set("seed", "1");
  merged.set("prox_tol", "1e-12");
  merged.set("prox_max_iters", "100");
  for (const auto& d : defaults_for(name)) merged.set(d.key, d.value);
  for (const auto& [k, v] : kv.values())
    if (k != "experiment" && k != "output") merged.set(k, v);

  ExperimentConfig cfg;
  cfg.name = name;
  cfg.potential_id = merged.get_string("potential", "ginzburg_landau");
  cfg.dim = static_cast<int>(merged.get_int("dim", 1));
  cfg.kappa = merged.get_double("kappa", 1.0);
  cfg.a = merged.get_double("a", 1.0);
  cfg.b = merged.get_double("b", 1.0);
  cfg.h_list = merged.get_list("h_list", {});
  const std::int64_t replicas = merged.get_int("replicas", 1);
  if (replicas <= 0) throw ConfigError("replicas must be positive");
  cfg.replicas = static_cast<std::size_t>(replicas);
  cfg.seed = merged.get_uint("seed", 1);
  cfg.output_path = kv.get_string("output", "");
  cfg.prox.tol = merged.get_double("prox_tol", 1e-12);
  cfg.prox.max_iters = static_cast<int>(merged.get_int("prox_max_iters", 100));
  cfg.prox.validate();
  cfg.params = merged;

  if (cfg.h_list.empty()) throw ConfigError("h_list must contain at least one step size");
  for (double h : cfg.h_list)
    if (!(h > 0.0)) throw ConfigError("h_list entries must be positive");
  // Constructs (and so validates) the potential.
  (void)cfg.potential();
  return cfg;
}

void ExperimentResult::write_csv(std::ostream& os, const ExperimentConfig& cfg) const {
  MetricReport copy = report;
  copy.header_comments.clear();
  for (const auto& line : cfg.describe()) copy.header_comments.push_back("config " + line);
  for (const auto& m : messages) copy.header_comments.push_back("note " + m);
  copy.header_comments.push_back(std::string("result ") + (passed ? "pass" : "fail"));
  copy.write_csv(os);
}

ExperimentResult run_entropy_rate(const ExperimentConfig& cfg, Exec exec) {
  const Potential p = cfg.potential();
  if (p.dim() != 1) throw ConfigError("entropy_rate needs a one-dimensional potential");
  const std::string mode = cfg.params.get_string("mode", "pde");

  ExperimentResult res;
  if (mode == "analytic") {
    if (p.name() != "gaussian") throw ConfigError("entropy_rate: mode=analytic needs a gaussian potential");
    std::vector<double> vals;
    for (double h : cfg.h_list) {
      const double s2 = cfg.kappa * gaussian_ilmc_stationary_variance(cfg.kappa, h);
      const double kl = 0.5 * (s2 - 1.0 - std::log(s2));
      res.report.add(h, 0.0, "stationary_kl_analytic", kl);
      vals.push_back(kl);
    }
    if (cfg.h_list.size() >= 3)
      res.report.slope_fits["stationary_kl_analytic"] = fit_loglog_slope(cfg.h_list, vals);
  } else if (mode == "pde") {
    const double t_end = cfg.params.get_double("t_end", 1.0);
    const Grid1D grid(cfg.params.get_double("domain_l", 3.0),
                      static_cast<std::size_t>(cfg.params.get_int("cells", 1200)));
    InitialDensitySpec spec;
    spec.gamma = cfg.params.get_double("gamma", 0.5);
    const DensityField rho0 = make_initial_density(grid, p, spec);
    const double divisor = cfg.params.get_double("dt_divisor", 64.0);
    if (!(divisor >= 1.0)) throw ConfigError("dt_divisor must be >= 1");
    const double dt = *std::min_element(cfg.h_list.begin(), cfg.h_list.end()) / divisor;
    // Each (potential, h) solve is independent; run them as separate workers.
    std::vector<MetricReport> parts(cfg.h_list.size());
    for_each_replica(cfg.h_list.size(), exec, [&](std::size_t i) {
      const double h_one[] = {cfg.h_list[i]};
      parts[i] = entropy_curve(p, rho0, t_end, h_one, dt, cfg.prox);
    });
    std::vector<double> hs, sups;
    for (const auto& part : parts) {
      for (const auto& row : part.rows) {
        res.report.rows.push_back(row);
        if (row.metric == "relative_entropy_sup" && row.value > 1e-13) {
          hs.push_back(row.h);
          sups.push_back(row.value);
        }
      }
    }
    if (hs.size() >= 3) res.report.slope_fits["relative_entropy_sup"] = fit_loglog_slope(hs, sups);
  } else {
    throw ConfigError("entropy_rate: mode must be pde or analytic");
  }

  if (res.report.slope_fits.empty()) {
    res.messages.push_back("fewer than 3 usable step sizes; slope fit refused");
    res.passed = false;
    return res;
  }
  const auto& fit = res.report.slope_fits.begin()->second;
  res.passed = in_window(fit.slope, kEntropySlopeMin, kEntropySlopeMax);
  res.messages.push_back("slope=" + fmt(fit.slope) + " window=[" + fmt(kEntropySlopeMin) + "," +
                         fmt(kEntropySlopeMax) + "]");
  return res;
}

ExperimentResult run_w1_stationary_rate(const ExperimentConfig& cfg, Exec exec) {
  const Potential p = cfg.potential();
  if (p.dim() != 1) throw ConfigError("w1_rate needs a one-dimensional potential");
  std::string mode = cfg.params.get_string("mode", "auto");
  if (mode == "auto") mode = p.name() == "gaussian" ? "analytic" : "sampled";

  ExperimentResult res;
  std::vector<double> vals;
  const std::string metric = mode == "analytic" ? "w1_analytic" : "w1";
  if (mode == "analytic") {
    if (p.name() != "gaussian") throw ConfigError("w1_rate: mode=analytic needs a gaussian potential");
    // W1 between centred Gaussians is |sigma_1 - sigma_2| E|N(0,1)|.
    const double sd_true = 1.0 / std::sqrt(cfg.kappa);
    for (double h : cfg.h_list) {
      const double sd_h = std::sqrt(gaussian_ilmc_stationary_variance(cfg.kappa, h));
      const double w1 = std::sqrt(2.0 / M_PI) * std::abs(sd_h - sd_true);
      res.report.add(h, 0.0, metric, w1);
      vals.push_back(w1);
    }
  } else if (mode == "sampled") {
    const double h_min = *std::min_element(cfg.h_list.begin(), cfg.h_list.end());
    const double h_ref = h_min / 8.0;
    std::vector<std::size_t> mult{1};
    for (double h : cfg.h_list) {
      const double k = std::round(h / h_ref);
      if (std::abs(k * h_ref - h) > 1e-9 * h)
        throw ConfigError("w1_rate: every h must be an integer multiple of min(h)/8");
      mult.push_back(static_cast<std::size_t>(k));
    }
    std::size_t period = 1;
    for (std::size_t k : mult) period = lcm(period, k);
    const auto fine_per_unit = static_cast<std::size_t>(std::ceil(1.0 / h_ref - 1e-9));
    const std::size_t thin = round_up(fine_per_unit, period);
    const double m = p.constants().m;
    const auto burn = round_up(static_cast<std::size_t>(std::ceil(20.0 / (m * h_ref))), period);
    const auto per_replica = static_cast<std::size_t>(cfg.params.get_int("samples", 100));
    if (per_replica == 0) throw ConfigError("w1_rate: samples must be positive");
    const Vec x0 = scalar_vec(cfg.params.get_double("x0", 0.0));

    const auto levels = stationary_samples_shared_path(p, h_ref, mult, x0, cfg.replicas,
                                                       per_replica, burn, thin, cfg.seed, exec,
                                                       cfg.prox);
    res.messages.push_back("h_ref=" + fmt(h_ref) + " burn_in_steps=" + std::to_string(burn) +
                           " thin_steps=" + std::to_string(thin) +
                           " samples=" + std::to_string(levels[0].size()));
    const std::size_t n_batches = std::min<std::size_t>(10, cfg.replicas);
    for (std::size_t l = 1; l < levels.size(); ++l) {
      const double w1 = w1_empirical_1d(levels[l], levels[0]);
      double se = 0.0;
      if (n_batches >= 2) {
        const std::size_t len = levels[0].size() / n_batches;
        std::vector<double> part;
        for (std::size_t bt = 0; bt < n_batches; ++bt) {
          const std::span<const double> a(levels[l].data() + bt * len, len);
          const std::span<const double> b(levels[0].data() + bt * len, len);
          part.push_back(w1_empirical_1d(a, b));
        }
        const double mean = std::accumulate(part.begin(), part.end(), 0.0) / n_batches;
        double var = 0.0;
        for (double v : part) var += (v - mean) * (v - mean);
        se = std::sqrt(var / (n_batches - 1) / n_batches);
      }
      res.report.add(cfg.h_list[l - 1], 0.0, metric, w1, se);
      vals.push_back(w1);
    }
  } else {
    throw ConfigError("w1_rate: mode must be auto, analytic or sampled");
  }

  if (cfg.h_list.size() < 3) {
    res.messages.push_back("fewer than 3 step sizes; slope fit refused");
    res.passed = true;
    return res;
  }
  const LogLogFit fit = fit_loglog_slope(cfg.h_list, vals);
  res.report.slope_fits[metric] = fit;
  res.passed = in_window(fit.slope, kW1SlopeMin, kW1SlopeMax);
  res.messages.push_back("slope=" + fmt(fit.slope) + " window=[" + fmt(kW1SlopeMin) + "," +
                         fmt(kW1SlopeMax) + "]");
  return res;
}

ErgodicityResult run_ergodicity(const ExperimentConfig& cfg, Exec exec) {
  const Potential p = cfg.potential();
  const double z0 = cfg.params.get_double("z0", 2.0);
  const double t_max = cfg.params.get_double("t_max", 10.0);
  LyapunovConfig lyap = LyapunovConfig::defaults_for(p);
  lyap.r_f = cfg.params.get_double("rf", lyap.r_f);
  lyap.c_f = cfg.params.get_double("cf", 1.0 / lyap.r_f);
  CouplingOptions opts;
  opts.n_substeps = static_cast<std::size_t>(cfg.params.get_int("substeps", 16));
  if (cfg.params.get_bool("drift_only", false)) opts.noise_scale = 0.0;

  ErgodicityResult res;
  res.passed = true;
  for (double h : cfg.h_list) {
    const auto n_steps = static_cast<std::size_t>(std::ceil(t_max / h - 1e-9));
    ContractionReport rep =
        estimate_contraction(p, h, n_steps, cfg.replicas, z0, lyap, cfg.seed, opts, exec, cfg.prox);
    for (const auto& row : rep.rows) {
      res.report.add(h, row.t, "mean_f", row.mean_f, row.std_error);
      res.report.add(h, row.t, "coalesced_frac", row.coalesced_frac);
    }
    res.report.add(h, 0.0, "rate", rep.rate);
    res.report.add(h, 0.0, "rate_r2", rep.r_squared);
    res.messages.push_back("h=" + fmt(h) + " rate=" + fmt(rep.rate) + " r2=" + fmt(rep.r_squared) +
                           " fit_points=" + std::to_string(rep.fit_points));
    if (rep.degenerate || !(rep.rate > 0.0) || rep.r_squared < kContractionMinR2) {
      res.passed = false;
      res.messages.push_back("h=" + fmt(h) + " contraction fit rejected");
    }
    res.contraction.push_back(std::move(rep));
  }
  for (std::size_t i = 0; i < res.contraction.size(); ++i)
    for (std::size_t j = i + 1; j < res.contraction.size(); ++j) {
      const double a = res.contraction[i].rate;
      const double b = res.contraction[j].rate;
      const double hi = std::max(std::abs(a), std::abs(b));
      const double spread = hi > 0.0 ? std::abs(a - b) / hi : 0.0;
      if (spread > kContractionRateSpread) {
        res.passed = false;
        res.messages.push_back("rates differ by " + fmt(100.0 * spread) + "% between h=" +
                               fmt(res.contraction[i].h) + " and h=" + fmt(res.contraction[j].h));
      }
    }
  return res;
}

StabilityResult run_stability_demo(const ExperimentConfig& cfg, Exec) {
  const Potential p = cfg.potential();
  const double h = cfg.h_list.front();
  ChainConfig chain;
  chain.h = h;
  chain.n_steps = static_cast<std::size_t>(cfg.params.get_int("steps", 10000));
  chain.seed = cfg.seed;
  chain.replica_id = 0;
  const Vec x0 = Vec::Constant(p.dim(), cfg.params.get_double("x0", 10.0));

  const Trajectory lmc = run_chain(p, chain, Method::kLmc, x0, cfg.prox);
  const Trajectory ilmc = run_chain(p, chain, Method::kIlmc, x0, cfg.prox);

  StabilityResult res;
  res.lmc_blew_up = lmc.blew_up;
  res.lmc_blow_up_step = lmc.blow_up_step;
  for (std::size_t n = 1; n < ilmc.states.size(); ++n)
    res.ilmc_max_abs = std::max(res.ilmc_max_abs, ilmc.states[n].cwiseAbs().maxCoeff());
  res.report.add(h, 0.0, "lmc_blew_up", lmc.blew_up ? 1.0 : 0.0);
  res.report.add(h, 0.0, "lmc_blow_up_step", static_cast<double>(lmc.blow_up_step));
  res.report.add(h, 0.0, "ilmc_blew_up", ilmc.blew_up ? 1.0 : 0.0);
  res.report.add(h, 0.0, "ilmc_max_abs", res.ilmc_max_abs);
  res.passed = lmc.blew_up && !ilmc.blew_up && res.ilmc_max_abs <= 5.0;
  res.messages.push_back("lmc_blow_up_step=" + std::to_string(lmc.blow_up_step) +
                         " ilmc_max_abs=" + fmt(res.ilmc_max_abs));
  return res;
}

ExperimentResult run_crossval(const ExperimentConfig& cfg, Exec exec) {
  const Potential p = cfg.potential();
  if (p.dim() != 1) throw ConfigError("crossval needs a one-dimensional potential");
  const double h = cfg.h_list.front();
  const Vec x0 = scalar_vec(cfg.params.get_double("x0", 1.0));
  const auto substeps = cfg.params.get_list("substeps_list", {10, 100, 1000});
  const double gap_tol = cfg.params.get_double("gap_tol", 0.01);
  if (substeps.empty()) throw ConfigError("crossval: substeps_list is empty");

  ExperimentResult res;
  res.passed = true;

  // Grid coincidence: the interpolation at offset h is the iLMC step.
  double coincidence = 0.0;
  for (std::uint64_t r = 0; r < 64; ++r) {
    const Vec dw = wiener_increment(cfg.seed, r, 0, p.dim(), h);
    const Vec path[] = {0.5 * dw, dw};
    const double offs[] = {0.5 * h, h};
    const auto interp = interpolate_within_step(p, h, x0, path, offs, cfg.prox);
    coincidence = std::max(coincidence, (interp[1] - ilmc_step(p, h, x0, dw, cfg.prox)).norm());
  }
  res.report.add(h, h, "grid_coincidence", coincidence);
  if (coincidence > 1e-10) {
    res.passed = false;
    res.messages.push_back("interpolation does not reproduce the iLMC step at t_{n+1}");
  }

  std::vector<double> gaps, ses;
  for (double ns : substeps) {
    const auto n = static_cast<std::size_t>(ns);
    const OneStepSamples s = one_step_crossval(p, h, x0, cfg.replicas, n, cfg.seed, exec, cfg.prox);
    const double gap = w1_empirical_1d(s.exact, s.sde);
    // Standard error of the pathwise mean |difference|, which bounds the gap.
    double mean = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < s.exact.size(); ++i) {
      const double d = std::abs(s.exact[i] - s.sde[i]);
      mean += d;
      m2 += d * d;
    }
    const double nn = static_cast<double>(s.exact.size());
    mean /= nn;
    const double se = std::sqrt(std::max(0.0, m2 / nn - mean * mean) / nn);
    res.report.add(h, static_cast<double>(n), "w1_gap", gap, se);
    res.report.add(h, static_cast<double>(n), "pathwise_gap", mean, se);
    gaps.push_back(gap);
    ses.push_back(se);
  }
  for (std::size_t i = 1; i < gaps.size(); ++i)
    if (gaps[i] > gaps[i - 1] + 2.0 * std::hypot(ses[i], ses[i - 1])) {
      res.passed = false;
      res.messages.push_back("W1 gap increased from substeps=" + fmt(substeps[i - 1]) + " to " +
                             fmt(substeps[i]));
    }
  if (gaps.back() > gap_tol) {
    res.passed = false;
    res.messages.push_back("final W1 gap " + fmt(gaps.back()) + " exceeds " + fmt(gap_tol));
  }
  res.messages.push_back("final_gap=" + fmt(gaps.back()));
  return res;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, Exec exec) {
  if (cfg.name == "entropy_rate") return run_entropy_rate(cfg, exec);
  if (cfg.name == "w1_rate") return run_w1_stationary_rate(cfg, exec);
  if (cfg.name == "ergodicity") return run_ergodicity(cfg, exec);
  if (cfg.name == "stability") return run_stability_demo(cfg, exec);
  if (cfg.name == "crossval") return run_crossval(cfg, exec);
  throw ConfigError("unknown experiment '" + cfg.name + "'");
}

}  // namespace ilmc
