#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ipsim/models.hpp"

namespace ipsim {

enum class InitialKind { Random, Uniform, Front, Counts };

std::string_view initial_kind_name(InitialKind kind);

struct InitialSpec {
  InitialKind kind = InitialKind::Random;
  // Random and front: per-state probabilities. With S-1 entries state 0
  // takes the remainder; with S entries they must sum to 1.
  std::vector<double> densities;
  // Uniform: the state everywhere. Front: the state of the right half.
  int state = 0;
  // Counts: individuals per site.
  std::uint32_t hawks = 0;
  std::uint32_t doves = 0;

  friend bool operator==(const InitialSpec&, const InitialSpec&) = default;
};

struct OdeSpec {
  std::string system;
  ParamMap params;
  std::vector<double> u0;
  double horizon = 100.0;
  double tol = 1e-10;
  double sample_every = 1.0;

  friend bool operator==(const OdeSpec&, const OdeSpec&) = default;
};

struct PdeSpec {
  std::string reaction;  // sexual or catalyst
  ParamMap params;
  std::size_t cells = 2000;
  double dx = 0.1;
  double dt = 0.0;  // 0 picks 0.4 dx^2 / components
  double horizon = 100.0;
  double sample_every = 1.0;
  std::vector<double> bracket;  // critical_beta bracket, empty for none
  double tol = 0.05;

  friend bool operator==(const PdeSpec&, const PdeSpec&) = default;
};

struct ExperimentConfig {
  std::string model;
  ParamMap params;

  int width = 64;
  int height = 64;

  InitialSpec initial;

  double horizon = 100.0;
  double sample_every = 1.0;
  std::size_t replicates = 1;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  double stirring = 0.0;          // epsilon; 0 disables stirring
  double checkpoint_every = 0.0;  // wall-clock seconds; 0 disables
  bool resume = false;

  std::string output;                   // directory; empty writes nothing
  std::vector<double> snapshot_times;   // PPM snapshots of each replicate
  std::vector<std::array<std::uint8_t, 3>> palette;  // empty: default palette

  double threshold = 0.05;
  double window = 0.2;  // fraction of the horizon

  std::string sweep_axis;
  std::vector<double> sweep_values;

  OdeSpec ode;
  PdeSpec pde;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;

  // Sample times 0, sample_every, ... up to and including the horizon.
  std::vector<double> sample_times() const;
};

// INI-style text: `[section]` headers and `key = value` lines; `#` starts a
// comment. Unknown sections and keys raise ConfigError.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);
std::string emit_config(const ExperimentConfig& config);

// Checks ranges and that the model name is registered; throws ConfigError.
void validate(const ExperimentConfig& config);

// Shortest decimal that parses back to the same double.
std::string format_double(double value);

}  // namespace ipsim
