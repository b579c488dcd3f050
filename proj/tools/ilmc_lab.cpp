// ilmc-lab: experiment runner and sampling front-end.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "ilmc/coupling.hpp"
#include "ilmc/errors.hpp"
#include "ilmc/experiments.hpp"
#include "ilmc/fp1d.hpp"
#include "ilmc/metrics.hpp"
#include "ilmc/samplers.hpp"

namespace {

using namespace ilmc;

struct PotentialFlags {
  std::string id = "ginzburg_landau";
  int dim = 1;
  double kappa = 1.0;
  double a = 1.0;
  double b = 1.0;

  void attach(CLI::App& cmd) {
    cmd.add_option("--potential", id, "gaussian | ginzburg_landau | double_well");
    cmd.add_option("--dim", dim, "state dimension");
    cmd.add_option("--kappa", kappa, "Gaussian precision");
    cmd.add_option("--a", a, "quartic coefficient");
    cmd.add_option("--b", b, "quadratic coefficient");
  }
  Potential build() const { return make_potential(id, dim, kappa, a, b); }
};

struct ProxFlags {
  ProxConfig cfg;
  void attach(CLI::App& cmd) {
    cmd.add_option("--prox-tol", cfg.tol, "Newton residual tolerance");
    cmd.add_option("--prox-max-iters", cfg.max_iters, "Newton iteration cap");
  }
};

/// Opens --output or falls back to stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw ConfigError("cannot open output file '" + path + "'");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

struct ExperimentFlags {
  std::string config_path;
  std::vector<std::string> sets;
  std::string h_list;
  std::string potential;
  std::string output;
  std::size_t replicas = 0;
  std::uint64_t seed = 0;
  double prox_tol = 0.0;
  int prox_max_iters = 0;
  bool serial = false;

  void attach(CLI::App& cmd) {
    cmd.add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
    cmd.add_option("--set", sets, "override key=value (repeatable)");
    cmd.add_option("--h-list", h_list, "comma-separated step sizes");
    cmd.add_option("--potential", potential, "potential id");
    cmd.add_option("--replicas", replicas, "replica count");
    cmd.add_option("--seed", seed, "base seed");
    cmd.add_option("--output", output, "CSV output path (default stdout)");
    cmd.add_option("--prox-tol", prox_tol, "Newton residual tolerance");
    cmd.add_option("--prox-max-iters", prox_max_iters, "Newton iteration cap");
    cmd.add_flag("--serial", serial, "use the serial reference kernels");
  }

  KeyValueConfig merged(const CLI::App& cmd) const {
    KeyValueConfig kv = config_path.empty() ? KeyValueConfig{} : KeyValueConfig::load(config_path);
    for (const auto& s : sets) kv.apply_override(s);
    if (cmd.count("--h-list")) kv.set("h_list", h_list);
    if (cmd.count("--potential")) kv.set("potential", potential);
    if (cmd.count("--replicas")) kv.set("replicas", std::to_string(replicas));
    if (cmd.count("--seed")) kv.set("seed", std::to_string(seed));
    if (cmd.count("--output")) kv.set("output", output);
    if (cmd.count("--prox-tol")) kv.set("prox_tol", format_number(prox_tol));
    if (cmd.count("--prox-max-iters")) kv.set("prox_max_iters", std::to_string(prox_max_iters));
    return kv;
  }
};

int run_named_experiment(const std::string& name, const ExperimentFlags& flags,
                         const CLI::App& cmd) {
  const ExperimentConfig cfg = resolve_experiment_config(name, flags.merged(cmd));
  const ExperimentResult res = run_experiment(cfg, flags.serial ? Exec::kSerial : Exec::kParallel);
  Sink sink(cfg.output_path);
  res.write_csv(sink.stream(), cfg);
  for (const auto& m : res.messages) std::cerr << name << ": " << m << "\n";
  std::cerr << name << ": " << (res.passed ? "PASS" : "FAIL") << "\n";
  return res.passed ? 0 : 1;
}

Vec parse_x0(const std::string& text, int dim) {
  const std::vector<double> vals = parse_number_list(text);
  if (vals.size() == 1) return Vec::Constant(dim, vals[0]);
  if (static_cast<int>(vals.size()) != dim)
    throw ConfigError("--x0 needs one value or dim values");
  Vec x(dim);
  for (int i = 0; i < dim; ++i) x[i] = vals[i];
  return x;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Implicit Langevin Monte Carlo experiments"};
  app.require_subcommand(1);
  // "-h" is the step-size flag of sample and couple.
  app.set_help_flag("--help", "print this help message and exit");

  std::vector<std::pair<std::string, std::unique_ptr<ExperimentFlags>>> experiments;
  for (const auto& name : experiment_names()) {
    auto* cmd = app.add_subcommand(name, "run the " + name + " study");
    auto flags = std::make_unique<ExperimentFlags>();
    flags->attach(*cmd);
    experiments.emplace_back(name, std::move(flags));
  }

  // sample
  auto* sample = app.add_subcommand("sample", "run independent chains and dump trajectories");
  PotentialFlags sample_pot;
  ProxFlags sample_prox;
  double sample_h = 0.1;
  std::size_t sample_steps = 100, sample_reps = 1;
  std::uint64_t sample_seed = 1;
  std::string sample_method = "ilmc", sample_x0 = "0", sample_out;
  sample_pot.attach(*sample);
  sample_prox.attach(*sample);
  sample->add_option("--h", sample_h, "step size");
  sample->add_option("--steps", sample_steps, "steps per chain");
  sample->add_option("--replicas", sample_reps, "number of chains");
  sample->add_option("--seed", sample_seed, "base seed");
  sample->add_option("--method", sample_method, "ilmc | lmc");
  sample->add_option("--x0", sample_x0, "initial state (one value or dim values)");
  sample->add_option("--output", sample_out, "CSV output path");

  // couple
  auto* couple = app.add_subcommand("couple", "reflection-coupling contraction study");
  PotentialFlags couple_pot;
  ProxFlags couple_prox;
  double couple_h = 0.05, couple_z0 = 2.0, couple_cf = 0.0, couple_rf = 0.0;
  std::size_t couple_steps = 200, couple_reps = 1000, couple_sub = 16;
  std::uint64_t couple_seed = 1;
  std::string couple_out;
  bool couple_serial = false;
  couple_pot.attach(*couple);
  couple_prox.attach(*couple);
  couple->add_option("--h", couple_h, "step size");
  couple->add_option("--steps", couple_steps, "steps");
  couple->add_option("--replicas", couple_reps, "coupled pairs");
  couple->add_option("--z0", couple_z0, "initial separation");
  couple->add_option("--cf", couple_cf, "Lyapunov slope (default 1/rf)");
  couple->add_option("--rf", couple_rf, "Lyapunov radius (default 3 R')");
  couple->add_option("--substeps", couple_sub, "bridge substeps per step");
  couple->add_option("--seed", couple_seed, "base seed");
  couple->add_option("--output", couple_out, "CSV output path");
  couple->add_flag("--serial", couple_serial, "use the serial reference kernel");

  // fp
  auto* fp = app.add_subcommand("fp", "1D Fokker-Planck relative entropy curves");
  PotentialFlags fp_pot;
  ProxFlags fp_prox;
  double fp_gamma = 0.5, fp_t_end = 1.0, fp_domain = 3.0, fp_divisor = 64.0;
  std::size_t fp_cells = 1200;
  std::string fp_hlist = "0.2,0.1,0.05,0.025", fp_out, fp_dump;
  fp_pot.attach(*fp);
  fp_prox.attach(*fp);
  fp->add_option("--gamma", fp_gamma, "initial density exponent");
  fp->add_option("--t-end", fp_t_end, "final time");
  fp->add_option("--h-list", fp_hlist, "comma-separated step sizes");
  fp->add_option("--cells", fp_cells, "grid cells");
  fp->add_option("--domain-l", fp_domain, "half-width of the domain");
  fp->add_option("--dt-divisor", fp_divisor, "dt = min(h) / divisor");
  fp->add_option("--output", fp_out, "CSV output path");
  fp->add_option("--dump", fp_dump, "prefix for x,rho,rho_h density dumps");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    for (const auto& [name, flags] : experiments) {
      auto* cmd = app.get_subcommand(name);
      if (cmd->parsed()) return run_named_experiment(name, *flags, *cmd);
    }

    if (sample->parsed()) {
      sample_prox.cfg.validate();
      const Potential p = sample_pot.build();
      const Method method = parse_method(sample_method);
      if (sample_reps == 0) throw ConfigError("--replicas must be positive");
      const Vec x0 = parse_x0(sample_x0, p.dim());
      Sink sink(sample_out);
      std::ostream& os = sink.stream();
      os << "replica,step";
      for (int i = 0; i < p.dim(); ++i) os << ",coord" << i;
      os << "\n";
      std::vector<std::string> summaries;
      for (std::size_t r = 0; r < sample_reps; ++r) {
        ChainConfig chain{sample_h, sample_steps, sample_seed, r};
        const Trajectory t = run_chain(p, chain, method, x0, sample_prox.cfg);
        double max_abs = 0.0;
        for (std::size_t n = 0; n < t.states.size(); ++n) {
          os << r << "," << n;
          for (int i = 0; i < p.dim(); ++i) os << "," << format_number(t.states[n][i]);
          os << "\n";
          max_abs = std::max(max_abs, t.states[n].cwiseAbs().maxCoeff());
        }
        summaries.push_back("#summary replica=" + std::to_string(r) +
                            " method=" + to_string(method) +
                            " steps=" + std::to_string(t.states.size() - 1) +
                            " blew_up=" + std::to_string(t.blew_up ? 1 : 0) +
                            " blow_up_step=" + std::to_string(t.blow_up_step) +
                            " max_abs=" + format_number(max_abs));
      }
      for (const auto& s : summaries) os << s << "\n";
      return 0;
    }

    if (couple->parsed()) {
      couple_prox.cfg.validate();
      const Potential p = couple_pot.build();
      if (couple_reps == 0) throw ConfigError("--replicas must be positive");
      LyapunovConfig lyap = LyapunovConfig::defaults_for(p);
      if (couple->count("--rf")) lyap.r_f = couple_rf;
      lyap.c_f = couple->count("--cf") ? couple_cf : 1.0 / lyap.r_f;
      CouplingOptions opts;
      opts.n_substeps = couple_sub;
      const ContractionReport rep =
          estimate_contraction(p, couple_h, couple_steps, couple_reps, couple_z0, lyap, couple_seed,
                               opts, couple_serial ? Exec::kSerial : Exec::kParallel,
                               couple_prox.cfg);
      Sink sink(couple_out);
      std::ostream& os = sink.stream();
      os << "step,t,mean_f,coalesced_frac,stderr\n";
      for (const auto& row : rep.rows)
        os << row.step << "," << format_number(row.t) << "," << format_number(row.mean_f) << ","
           << format_number(row.coalesced_frac) << "," << format_number(row.std_error) << "\n";
      os << "#rate=" << format_number(rep.rate) << " r2=" << format_number(rep.r_squared)
         << " fit_points=" << rep.fit_points << " degenerate=" << (rep.degenerate ? 1 : 0) << "\n";
      return 0;
    }

    if (fp->parsed()) {
      fp_prox.cfg.validate();
      const Potential p = fp_pot.build();
      const std::vector<double> hs = parse_number_list(fp_hlist);
      if (hs.empty()) throw ConfigError("--h-list is empty");
      const Grid1D grid(fp_domain, fp_cells);
      InitialDensitySpec spec;
      spec.gamma = fp_gamma;
      const DensityField rho0 = make_initial_density(grid, p, spec);
      const double dt = *std::min_element(hs.begin(), hs.end()) / fp_divisor;
      const MetricReport rep = entropy_curve(p, rho0, fp_t_end, hs, dt, fp_prox.cfg);
      Sink sink(fp_out);
      rep.write_csv(sink.stream());
      if (!fp_dump.empty()) {
        const double times[] = {fp_t_end / 4, fp_t_end / 2, fp_t_end};
        LangevinFlux lang(p, grid);
        const auto exact = evolve_fp(rho0, times, dt, lang);
        for (double h : hs) {
          IlmcFlux flux(p, grid, h, dt);
          const auto approx = evolve_fp(rho0, times, dt, flux);
          for (std::size_t k = 0; k < 3; ++k) {
            const std::string path =
                fp_dump + "_h" + format_number(h) + "_t" + format_number(times[k]) + ".csv";
            std::ofstream out(path);
            if (!out) throw ConfigError("cannot open dump file '" + path + "'");
            out << "x,rho,rho_h\n";
            for (std::size_t i = 0; i < grid.n_cells; ++i)
              out << format_number(grid.center(i)) << "," << format_number(exact[k].values[i])
                  << "," << format_number(approx[k].values[i]) << "\n";
          }
        }
      }
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
