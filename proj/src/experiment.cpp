#include "ipsim/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

#include "ipsim/engine.hpp"
#include "ipsim/errors.hpp"
#include "ipsim/models.hpp"
#include "param_reader.hpp"

namespace ipsim {

namespace {

std::vector<double> state_probabilities(const std::vector<double>& densities, std::size_t alphabet) {
  std::vector<double> probs(alphabet, 0.0);
  const double sum = std::accumulate(densities.begin(), densities.end(), 0.0);
  if (densities.size() + 1 == alphabet) {
    if (sum > 1.0 + 1e-12) throw ConfigError("initial densities sum to more than 1");
    probs[0] = std::max(0.0, 1.0 - sum);
    std::copy(densities.begin(), densities.end(), probs.begin() + 1);
  } else if (densities.size() == alphabet) {
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("initial densities over all states must sum to 1");
    probs = densities;
  } else {
    throw ConfigError("initial densities need " + std::to_string(alphabet - 1) + " or " +
                      std::to_string(alphabet) + " entries");
  }
  return probs;
}

State draw_state(const std::vector<double>& probs, RandomStream& rng) {
  double u = rng.uniform();
  for (std::size_t s = 0; s + 1 < probs.size(); ++s) {
    if (u < probs[s]) return static_cast<State>(s);
    u -= probs[s];
  }
  // Skip trailing zero-probability states that rounding might reach.
  std::size_t s = probs.size() - 1;
  while (s > 0 && probs[s] == 0.0) --s;
  return static_cast<State>(s);
}

std::string out_path(const ExperimentConfig& c, const std::string& name) {
  return (std::filesystem::path(c.output) / name).string();
}

std::string checkpoint_key(const ExperimentConfig& c) {
  ExperimentConfig k = c;
  k.resume = false;
  k.threads = 1;
  k.checkpoint_every = 0.0;
  k.replicates = 1;
  k.output.clear();
  return emit_config(k);
}

std::vector<double> grid_row(const StateGrid& grid) { return grid.fractions(); }

std::vector<double> grid_row(const CountGrid& grid) {
  const double n = static_cast<double>(grid.size());
  return {static_cast<double>(grid.total_hawks()) / n, static_cast<double>(grid.total_doves()) / n};
}

void store_grid(Checkpoint& cp, const StateGrid& grid) {
  cp.counts = false;
  cp.alphabet = static_cast<std::uint32_t>(grid.alphabet());
  cp.states.assign(grid.states().begin(), grid.states().end());
}

void store_grid(Checkpoint& cp, const CountGrid& grid) {
  cp.counts = true;
  cp.hawks.resize(grid.size());
  cp.doves.resize(grid.size());
  for (SiteIndex s = 0; s < grid.size(); ++s) {
    cp.hawks[s] = grid.hawks(s);
    cp.doves[s] = grid.doves(s);
  }
}

void load_grid(const Checkpoint& cp, StateGrid& grid) {
  if (cp.counts || cp.states.size() != grid.size() || cp.alphabet != grid.alphabet()) {
    throw ConfigError("checkpoint does not match the configured grid");
  }
  for (SiteIndex s = 0; s < grid.size(); ++s) grid.set(s, cp.states[s]);
}

void load_grid(const Checkpoint& cp, CountGrid& grid) {
  if (!cp.counts || cp.hawks.size() != grid.size()) {
    throw ConfigError("checkpoint does not match the configured grid");
  }
  for (SiteIndex s = 0; s < grid.size(); ++s) grid.set(s, cp.hawks[s], cp.doves[s]);
}

template <class EngineT, class GridT>
void drive(const ExperimentConfig& cfg, std::size_t r, EngineT& engine, GridT& grid,
           RandomStream& rng, ReplicateResult& result, std::size_t limit) {
  const auto samples = cfg.sample_times();
  const Palette palette = cfg.palette.empty() ? default_palette() : cfg.palette;
  const bool write = !cfg.output.empty();
  const std::string tag = "r" + std::to_string(r);
  const std::string cp_path = write ? out_path(cfg, "checkpoint_" + tag + ".bin") : std::string();

  // Snapshots are taken at the first sample time at or after each request.
  std::set<std::size_t> snapshot_at;
  for (double t : cfg.snapshot_times) {
    std::size_t k = 0;
    while (k + 1 < samples.size() && samples[k] < t) ++k;
    snapshot_at.insert(k);
  }

  SimClock clock;
  std::size_t next = 0;
  result.trace.columns = trace_columns(cfg);

  if (cfg.resume && write && std::filesystem::exists(cp_path)) {
    const Checkpoint cp = parse_checkpoint(read_file(cp_path));
    if (cp.config_text != checkpoint_key(cfg) || cp.replicate != r) {
      throw ConfigError("checkpoint '" + cp_path + "' was written by a different configuration");
    }
    load_grid(cp, grid);
    clock = cp.clock;
    next = static_cast<std::size_t>(cp.next_sample);
    result.absorbed = cp.absorbed;
    rng.restore(cp.rng_state);
    result.trace = cp.trace;
  }

  auto observe = [&](double t, const GridT& g) {
    const std::size_t k = result.trace.times.size();
    result.trace.times.push_back(t);
    result.trace.rows.push_back(grid_row(g));
    if constexpr (std::is_same_v<GridT, StateGrid>) {
      if (snapshot_at.count(k)) {
        std::string bytes = ppm_bytes(g, palette);
        if (write) {
          write_file_atomic(out_path(cfg, "snapshot_" + tag + "_t" + format_double(t) + ".ppm"), bytes);
        }
        result.snapshots.emplace_back(t, std::move(bytes));
      }
    }
  };

  auto save = [&] {
    Checkpoint cp;
    cp.config_text = checkpoint_key(cfg);
    cp.replicate = r;
    cp.width = grid.geometry().width();
    cp.height = grid.geometry().height();
    store_grid(cp, grid);
    cp.clock = clock;
    cp.next_sample = next;
    cp.absorbed = result.absorbed;
    cp.rng_state = rng.serialize();
    cp.trace = result.trace;
    write_file_atomic(cp_path, checkpoint_bytes(cp));
  };

  auto last_save = std::chrono::steady_clock::now();
  while (next < samples.size() && next < limit) {
    if (result.absorbed) {
      observe(samples[next], grid);
      ++next;
      continue;
    }
    const RunSummary s = run_until(engine, grid, clock, samples[next],
                                   std::span<const double>(samples), next, observe, rng);
    result.absorbed = s.absorbed;
    if (write && cfg.checkpoint_every > 0.0) {
      const auto now = std::chrono::steady_clock::now();
      if (std::chrono::duration<double>(now - last_save).count() >= cfg.checkpoint_every) {
        save();
        last_save = now;
      }
    }
  }
  result.events = clock.events;
  result.proposals = clock.proposals;
  if (next < samples.size()) {
    if (write) save();
    return;
  }
  if (write) {
    write_file_atomic(out_path(cfg, "trace_" + tag + ".csv"), trace_csv(result.trace));
    std::error_code ec;
    std::filesystem::remove(cp_path, ec);
  }
}

}  // namespace

std::vector<std::string> trace_columns(const ExperimentConfig& config) {
  if (is_count_model(config.model)) return {"hawks_per_site", "doves_per_site"};
  const auto model = make_site_model(config.model, config.params);
  std::vector<std::string> cols;
  for (std::size_t s = 0; s < model->alphabet(); ++s) cols.push_back("u_" + std::to_string(s));
  return cols;
}

std::vector<std::size_t> species_columns(std::string_view model, std::size_t columns) {
  std::vector<std::size_t> out;
  const bool vacant = !(model == "voter" || model == "host-pathogen" || is_count_model(model));
  for (std::size_t c = vacant ? 1 : 0; c < columns; ++c) out.push_back(c);
  return out;
}

StateGrid initial_grid(const ExperimentConfig& config, std::size_t alphabet, RandomStream& rng) {
  const TorusGeometry geometry(config.width, config.height);
  const auto& init = config.initial;
  StateGrid grid(geometry, alphabet);
  switch (init.kind) {
    case InitialKind::Uniform:
      if (init.state < 0 || static_cast<std::size_t>(init.state) >= alphabet) {
        throw ConfigError("initial state is outside the model alphabet");
      }
      for (SiteIndex s = 0; s < grid.size(); ++s) grid.set(s, static_cast<State>(init.state));
      break;
    case InitialKind::Random: {
      const auto probs = state_probabilities(init.densities, alphabet);
      for (SiteIndex s = 0; s < grid.size(); ++s) grid.set(s, draw_state(probs, rng));
      break;
    }
    case InitialKind::Front: {
      if (init.state < 0 || static_cast<std::size_t>(init.state) >= alphabet) {
        throw ConfigError("front fill state is outside the model alphabet");
      }
      const auto probs = state_probabilities(init.densities, alphabet);
      for (SiteIndex s = 0; s < grid.size(); ++s) {
        const bool left = geometry.x_of(s) < config.width / 2;
        grid.set(s, left ? draw_state(probs, rng) : static_cast<State>(init.state));
      }
      break;
    }
    case InitialKind::Counts:
      throw ConfigError("'counts' initial condition applies only to the prisoners-dilemma model");
  }
  return grid;
}

CountGrid initial_counts(const ExperimentConfig& config) {
  if (config.initial.kind != InitialKind::Counts) {
    throw ConfigError("the prisoners-dilemma model needs a 'counts' initial condition");
  }
  CountGrid grid(TorusGeometry(config.width, config.height));
  for (SiteIndex s = 0; s < grid.size(); ++s) grid.set(s, config.initial.hawks, config.initial.doves);
  return grid;
}

ReplicateResult run_replicate(const ExperimentConfig& config, std::size_t r) {
  return run_replicate(config, r, static_cast<std::size_t>(-1));
}

ReplicateResult run_replicate(const ExperimentConfig& config, std::size_t r, std::size_t limit) {
  validate(config);
  if (config.model.empty()) throw ConfigError("no model configured");
  ReplicateResult result;
  result.replicate = r;
  RandomStream rng(config.seed, r);
  if (is_count_model(config.model)) {
    if (config.stirring > 0.0) throw ConfigError("stirring applies only to site models");
    const auto model = make_count_model(config.model, config.params);
    CountGrid grid = initial_counts(config);
    CountEngine engine(model);
    drive(config, r, engine, grid, rng, result, limit);
    return result;
  }
  const auto model = make_site_model(config.model, config.params);
  StateGrid grid = initial_grid(config, model->alphabet(), rng);
  std::optional<StirringSpec> stirring;
  if (config.stirring > 0.0) stirring = StirringSpec{config.stirring};
  Engine engine(*model, grid.geometry(), stirring);
  drive(config, r, engine, grid, rng, result, limit);
  result.final_grid = std::move(grid);
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  validate(config);
  if (config.model.empty()) throw ConfigError("no model configured");
  ExperimentResult out;
  out.replicates.resize(config.replicates);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= config.replicates) return;
      try {
        out.replicates[r] = run_replicate(config, r);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(config.replicates);
        return;
      }
    }
  };
  const std::size_t workers = std::min(config.threads, config.replicates);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

CoexistenceVerdict detect_coexistence(const DensityTrace& trace, double threshold, double window) {
  CoexistenceVerdict v;
  v.threshold = threshold;
  v.persists.assign(trace.columns.size(), false);
  if (trace.times.empty()) return v;
  const double span = trace.times.back() - trace.times.front();
  if (window < 0.0 || window > span * (1.0 + 1e-12) + 1e-12) {
    throw ConfigError("coexistence window exceeds the trace span");
  }
  v.window_end = trace.times.back();
  v.window_start = v.window_end - window;
  v.persists.assign(trace.columns.size(), true);
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    if (trace.times[k] < v.window_start) continue;
    for (std::size_t c = 0; c < trace.columns.size(); ++c) {
      if (!(trace.rows[k][c] >= threshold)) v.persists[c] = false;
    }
  }
  return v;
}

bool all_persist(const CoexistenceVerdict& verdict, const std::vector<std::size_t>& columns) {
  for (auto c : columns) {
    if (c >= verdict.persists.size() || !verdict.persists[c]) return false;
  }
  return true;
}

std::vector<SweepRow> sweep(const ExperimentConfig& config, const std::string& axis,
                            const std::vector<double>& values) {
  std::vector<SweepRow> rows;
  if (values.empty()) return rows;
  if (axis.empty()) throw ConfigError("sweep axis is not set");
  for (std::size_t k = 0; k < values.size(); ++k) {
    ExperimentConfig point = config;
    point.params[axis] = format_double(values[k]);
    if (!config.output.empty()) {
      point.output = (std::filesystem::path(config.output) / ("sweep_" + std::to_string(k))).string();
    }
    const auto result = run_experiment(point);
    const auto columns = trace_columns(point);
    const auto species = species_columns(point.model, columns.size());
    SweepRow row;
    row.value = values[k];
    row.persistence.assign(columns.size(), 0.0);
    row.mean_final.assign(columns.size(), 0.0);
    const double n = static_cast<double>(result.replicates.size());
    for (const auto& rep : result.replicates) {
      const auto verdict = detect_coexistence(rep.trace, point.threshold, point.window * point.horizon);
      if (all_persist(verdict, species)) row.coexistence += 1.0 / n;
      for (std::size_t c = 0; c < columns.size(); ++c) {
        if (verdict.persists[c]) row.persistence[c] += 1.0 / n;
        row.mean_final[c] += rep.trace.rows.back()[c] / n;
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows, const std::vector<std::string>& columns) {
  std::string out = "value,coexistence";
  for (const auto& c : columns) out += ",persist_" + c;
  for (const auto& c : columns) out += ",mean_" + c;
  out += '\n';
  for (const auto& row : rows) {
    out += format_double(row.value) + "," + format_double(row.coexistence);
    for (double v : row.persistence) out += "," + format_double(v);
    for (double v : row.mean_final) out += "," + format_double(v);
    out += '\n';
  }
  return out;
}

std::vector<double> column_profile(const StateGrid& grid, State state) {
  const auto& g = grid.geometry();
  std::vector<double> profile(g.width(), 0.0);
  for (SiteIndex s = 0; s < grid.size(); ++s) {
    if (grid[s] == state) profile[g.x_of(s)] += 1.0;
  }
  for (auto& v : profile) v /= g.height();
  return profile;
}

pde::Reaction make_reaction(const PdeSpec& spec) {
  detail::ParamReader in(spec.params);
  pde::Reaction reaction;
  if (spec.reaction == "sexual") {
    reaction = pde::SexualReaction{in.number("beta")};
  } else if (spec.reaction == "catalyst") {
    const double p = in.number("p");
    const double q = in.number("q", 2.0 * (1.0 - p));
    const double r = in.number("r", 1.0);
    if (!std::isfinite(r)) throw ModelError("the catalyst PDE needs a finite r");
    reaction = pde::CatalystReaction{p, q, r};
  } else {
    throw ModelError("unknown PDE reaction '" + spec.reaction + "'");
  }
  in.finish();
  return reaction;
}

pde::FrontSetup front_setup(const PdeSpec& spec) {
  pde::FrontSetup setup;
  setup.cells = spec.cells;
  setup.dx = spec.dx;
  const double comps = static_cast<double>(pde::components(make_reaction(spec)));
  setup.dt = spec.dt > 0.0 ? spec.dt : 0.4 * spec.dx * spec.dx / comps;
  setup.horizon = spec.horizon;
  setup.sample_every = spec.sample_every;
  return setup;
}

}  // namespace ipsim
