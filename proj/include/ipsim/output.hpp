#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ipsim/engine.hpp"
#include "ipsim/lattice.hpp"

namespace ipsim {

// Sampled time series: one row of values per sample time.
struct DensityTrace {
  std::vector<std::string> columns;
  std::vector<double> times;
  std::vector<std::vector<double>> rows;

  friend bool operator==(const DensityTrace&, const DensityTrace&) = default;
};

// Header `t,<columns>`, shortest round-trip decimals, LF line endings.
std::string trace_csv(const DensityTrace& trace);
DensityTrace parse_trace_csv(std::string_view text);

using Rgb = std::array<std::uint8_t, 3>;
using Palette = std::vector<Rgb>;

// 0 white, 1 black, 2 mid-gray, 3 light-gray, then fixed colours for 4..7.
Palette default_palette();

// Binary P6 image, one pixel per site, row y = 0 first.
std::string ppm_bytes(const StateGrid& grid, const Palette& palette);

// Writes `bytes` to `path` through a temporary file and a rename.
void write_file_atomic(const std::string& path, std::string_view bytes);
std::string read_file(const std::string& path);

inline constexpr char kCheckpointMagic[8] = {'I', 'P', 'S', 'I', 'M', 'C', 'K', 'P'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Full replicate state at a sample boundary.
struct Checkpoint {
  std::string config_text;
  std::uint64_t replicate = 0;
  int width = 0;
  int height = 0;
  bool counts = false;
  std::uint32_t alphabet = 0;
  std::vector<std::uint8_t> states;
  std::vector<std::uint32_t> hawks;
  std::vector<std::uint32_t> doves;
  SimClock clock;
  std::uint64_t next_sample = 0;
  bool absorbed = false;
  std::string rng_state;
  DensityTrace trace;
};

std::string checkpoint_bytes(const Checkpoint& cp);
Checkpoint parse_checkpoint(std::string_view bytes);

}  // namespace ipsim
