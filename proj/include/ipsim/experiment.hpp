#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ipsim/config.hpp"
#include "ipsim/lattice.hpp"
#include "ipsim/output.hpp"
#include "ipsim/random_stream.hpp"
#include "ipsim/rd_pde.hpp"

namespace ipsim {

struct ReplicateResult {
  std::size_t replicate = 0;
  DensityTrace trace;
  bool absorbed = false;
  std::uint64_t events = 0;
  std::uint64_t proposals = 0;
  // (sample time, PPM bytes) for each requested snapshot.
  std::vector<std::pair<double, std::string>> snapshots;
  std::optional<StateGrid> final_grid;
};

struct ExperimentResult {
  std::vector<ReplicateResult> replicates;
};

// Trace column names: u_0..u_{S-1}, or hawks_per_site,doves_per_site.
std::vector<std::string> trace_columns(const ExperimentConfig& config);

// Columns holding species (all states except vacant 0 where the model has one).
std::vector<std::size_t> species_columns(std::string_view model, std::size_t columns);

StateGrid initial_grid(const ExperimentConfig& config, std::size_t alphabet, RandomStream& rng);
CountGrid initial_counts(const ExperimentConfig& config);

// Runs replicate `r` with RandomStream(seed, r). Writes its trace, snapshots
// and checkpoints when config.output is set.
ReplicateResult run_replicate(const ExperimentConfig& config, std::size_t r);

// Stops once `limit` samples are recorded and, when writing output, leaves
// a checkpoint there for a later resume.
ReplicateResult run_replicate(const ExperimentConfig& config, std::size_t r, std::size_t limit);

// All replicates, spread over config.threads workers; results are ordered
// by replicate index.
ExperimentResult run_experiment(const ExperimentConfig& config);

struct CoexistenceVerdict {
  std::vector<bool> persists;
  double threshold = 0.0;
  double window_start = 0.0;
  double window_end = 0.0;
};

// A column persists iff it is >= threshold at every sample in
// [t_end - window, t_end].
CoexistenceVerdict detect_coexistence(const DensityTrace& trace, double threshold, double window);

bool all_persist(const CoexistenceVerdict& verdict, const std::vector<std::size_t>& columns);

struct SweepRow {
  double value = 0.0;
  // Fraction of replicates in which every species persists.
  double coexistence = 0.0;
  std::vector<double> persistence;
  std::vector<double> mean_final;
};

// One experiment per value, with the model parameter `axis` set to it.
std::vector<SweepRow> sweep(const ExperimentConfig& config, const std::string& axis,
                            const std::vector<double>& values);
std::string sweep_csv(const std::vector<SweepRow>& rows, const std::vector<std::string>& columns);

// Fraction of sites in `state` in each column x = 0..W-1.
std::vector<double> column_profile(const StateGrid& grid, State state);

// Reaction and front-tracking settings from a [pde] section. dt = 0
// selects 0.4 dx^2 / components.
pde::Reaction make_reaction(const PdeSpec& spec);
pde::FrontSetup front_setup(const PdeSpec& spec);

}  // namespace ipsim
