#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ipsim/config.hpp"
#include "ipsim/errors.hpp"
#include "ipsim/experiment.hpp"
#include "ipsim/meanfield.hpp"
#include "ipsim/output.hpp"
#include "ipsim/rd_pde.hpp"

namespace {

using namespace ipsim;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicates;
  std::optional<std::string> out;
  std::optional<std::size_t> threads;
};

ExperimentConfig load(const Globals& g) {
  if (g.config.empty()) throw ConfigError("--config is required");
  ExperimentConfig cfg = load_config(g.config);
  if (g.seed) cfg.seed = *g.seed;
  if (g.replicates) cfg.replicates = *g.replicates;
  if (g.out) cfg.output = *g.out;
  if (g.threads) cfg.threads = *g.threads;
  validate(cfg);
  return cfg;
}

// Writes to <out>/<name>, or to stdout when no output directory is set.
void emit(const ExperimentConfig& cfg, const std::string& name, const std::string& text) {
  if (cfg.output.empty()) {
    std::cout << text;
    return;
  }
  const auto path = (std::filesystem::path(cfg.output) / name).string();
  write_file_atomic(path, text);
  std::cerr << "wrote " << path << '\n';
}

std::vector<double> schedule(double horizon, double every) {
  std::vector<double> times;
  if (!(every > 0.0)) throw ConfigError("sample_every must be positive");
  for (std::size_t k = 1;; ++k) {
    const double t = static_cast<double>(k) * every;
    if (t > horizon * (1.0 + 1e-12)) break;
    times.push_back(std::min(t, horizon));
  }
  if (times.empty() || times.back() < horizon) times.push_back(horizon);
  return times;
}

int cmd_sim(const Globals& g) {
  const auto cfg = load(g);
  const auto result = run_experiment(cfg);
  const auto species = species_columns(cfg.model, trace_columns(cfg).size());
  std::cout << "replicate,absorbed,events,proposals,coexist";
  for (const auto& c : trace_columns(cfg)) std::cout << ',' << c;
  std::cout << '\n';
  for (const auto& rep : result.replicates) {
    const auto verdict = detect_coexistence(rep.trace, cfg.threshold, cfg.window * cfg.horizon);
    std::cout << rep.replicate << ',' << (rep.absorbed ? 1 : 0) << ',' << rep.events << ','
              << rep.proposals << ',' << (all_persist(verdict, species) ? 1 : 0);
    for (double v : rep.trace.rows.back()) std::cout << ',' << format_double(v);
    std::cout << '\n';
  }
  return kExitOk;
}

int cmd_snapshot(const Globals& g) {
  auto cfg = load(g);
  if (cfg.snapshot_times.empty()) cfg.snapshot_times = {cfg.horizon};
  if (cfg.output.empty()) throw ConfigError("snapshot needs an output directory (--out)");
  const auto rep = run_replicate(cfg, 0);
  for (const auto& [t, bytes] : rep.snapshots) {
    std::cout << "snapshot_r0_t" << format_double(t) << ".ppm " << bytes.size() << " bytes\n";
  }
  return kExitOk;
}

int cmd_ode(const Globals& g) {
  const auto cfg = load(g);
  const auto system = ode::make_system(cfg.ode.system, cfg.ode.params);
  if (cfg.ode.u0.size() != system.dimension()) {
    throw ConfigError("u0 needs " + std::to_string(system.dimension()) + " entries");
  }
  const ode::Vector u0 = Eigen::Map<const ode::Vector>(cfg.ode.u0.data(), cfg.ode.u0.size());
  const auto times = schedule(cfg.ode.horizon, cfg.ode.sample_every);
  const auto traj = ode::integrate(system, u0, cfg.ode.horizon, cfg.ode.tol, times);
  DensityTrace trace;
  for (std::size_t i = 0; i < system.dimension(); ++i) trace.columns.push_back("u_" + std::to_string(i + 1));
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    trace.times.push_back(traj.times[k]);
    trace.rows.emplace_back(traj.states[k].data(), traj.states[k].data() + traj.states[k].size());
  }
  emit(cfg, "ode.csv", trace_csv(trace));
  std::cerr << "steps accepted " << traj.stats.accepted << ", rejected " << traj.stats.rejected << '\n';
  return kExitOk;
}

int cmd_fixed_points(const Globals& g) {
  const auto cfg = load(g);
  const auto system = ode::make_system(cfg.ode.system, cfg.ode.params);
  ode::FixedPointOptions options;
  options.tol = cfg.ode.tol;
  const auto search = ode::find_fixed_points(system, options);
  std::string out;
  for (std::size_t i = 0; i < system.dimension(); ++i) out += "u_" + std::to_string(i + 1) + ",";
  std::size_t eigs = 0;
  for (const auto& r : search.roots) eigs = std::max(eigs, r.eigenvalues.size());
  for (std::size_t i = 0; i < eigs; ++i) {
    out += "re_" + std::to_string(i + 1) + ",im_" + std::to_string(i + 1) + ",";
  }
  out += "residual,class,degenerate\n";
  for (const auto& r : search.roots) {
    for (Eigen::Index i = 0; i < r.point.size(); ++i) out += format_double(r.point[i]) + ",";
    for (std::size_t i = 0; i < eigs; ++i) {
      const auto z = i < r.eigenvalues.size() ? r.eigenvalues[i] : std::complex<double>{};
      out += format_double(z.real()) + "," + format_double(z.imag()) + ",";
    }
    out += format_double(r.residual) + "," + std::string(ode::stability_name(r.stability)) + "," +
           (r.degenerate ? "1" : "0") + "\n";
  }
  emit(cfg, "fixed_points.csv", out);
  std::cerr << search.roots.size() << " roots, " << search.dropped_starts << " starts dropped\n";
  return kExitOk;
}

pde::PdeState front_state(const pde::Reaction& reaction, const pde::FrontSetup& setup) {
  if (const auto* s = std::get_if<pde::SexualReaction>(&reaction)) {
    return pde::step_profile(setup.cells, setup.dx, setup.dt, {pde::rho2(s->beta)}, {0.0});
  }
  const auto& c = std::get<pde::CatalystReaction>(reaction);
  const auto fp = pde::catalyst_fixed_points(c.p, c.q, c.r);
  if (!fp.interior) throw ModelError("catalyst parameters have no interior fixed point");
  return pde::step_profile(setup.cells, setup.dx, setup.dt, {fp.alpha, fp.beta}, {1.0, 0.0});
}

int cmd_pde(const Globals& g) {
  const auto cfg = load(g);
  const auto reaction = make_reaction(cfg.pde);
  const auto setup = front_setup(cfg.pde);
  auto state = front_state(reaction, setup);
  pde::integrate_pde(reaction, state, cfg.pde.horizon);
  emit(cfg, "profile.csv", pde::profile_csv(state));
  return kExitOk;
}

int cmd_speed(const Globals& g) {
  const auto cfg = load(g);
  const auto reaction = make_reaction(cfg.pde);
  const auto setup = front_setup(cfg.pde);
  std::string out;
  if (cfg.pde.bracket.size() == 2) {
    const auto bc = pde::critical_beta(cfg.pde.bracket[0], cfg.pde.bracket[1], cfg.pde.tol, setup);
    out = "beta_c,tolerance,probes\n" + format_double(bc.beta) + "," + format_double(bc.tolerance) +
          "," + std::to_string(bc.probes) + "\n";
  } else if (!cfg.pde.bracket.empty()) {
    throw ConfigError("bracket needs exactly two values");
  } else {
    const auto est = pde::estimate_front_speed(reaction, setup);
    out = "speed,residual,level,window_start,window_end,valid\n" + format_double(est.speed) + "," +
          format_double(est.residual) + "," + format_double(est.level) + "," +
          format_double(est.window_start) + "," + format_double(est.window_end) + "," +
          (est.valid ? "1" : "0") + "\n";
    if (!est.valid) std::cerr << "front left the domain; estimate invalid\n";
  }
  emit(cfg, "speed.csv", out);
  return kExitOk;
}

int cmd_sweep(const Globals& g) {
  const auto cfg = load(g);
  const auto rows = sweep(cfg, cfg.sweep_axis, cfg.sweep_values);
  emit(cfg, "sweep.csv", sweep_csv(rows, trace_columns(cfg)));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic spatial model simulator and mean-field analysis"};
  app.require_subcommand(1);
  Globals g;
  auto add_globals = [&](CLI::App* cmd) {
    cmd->add_option("--config", g.config, "Experiment config file");
    cmd->add_option("--seed", g.seed, "Master seed");
    cmd->add_option("--replicates", g.replicates, "Replicate count");
    cmd->add_option("--out", g.out, "Output directory");
    cmd->add_option("--threads", g.threads, "Worker threads");
  };
  add_globals(&app);
  struct Entry {
    const char* name;
    const char* help;
    int (*run)(const Globals&);
  };
  const Entry entries[] = {
      {"sim", "Run stochastic replicates and write density traces", cmd_sim},
      {"ode", "Integrate the mean-field ODE", cmd_ode},
      {"pde", "Integrate the reaction-diffusion PDE from a front", cmd_pde},
      {"sweep", "Sweep a model parameter and summarise persistence", cmd_sweep},
      {"speed", "Estimate the front speed or the critical beta", cmd_speed},
      {"fixed-points", "Find and classify ODE fixed points", cmd_fixed_points},
      {"snapshot", "Write PPM snapshots of replicate 0", cmd_snapshot},
  };
  int (*chosen)(const Globals&) = nullptr;
  for (const auto& e : entries) {
    auto* cmd = app.add_subcommand(e.name, e.help);
    add_globals(cmd);
    cmd->callback([&chosen, run = e.run] { chosen = run; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  try {
    return chosen(g);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ModelError& e) {
    std::cerr << "model error: " << e.what() << '\n';
    return kExitModel;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
