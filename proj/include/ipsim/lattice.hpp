#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace ipsim {

using SiteIndex = std::size_t;
using State = std::uint8_t;

inline constexpr SiteIndex kNoSite = static_cast<SiteIndex>(-1);
inline constexpr std::size_t kMaxStates = 8;

struct Offset {
  int dx = 0;
  int dy = 0;
  friend bool operator==(const Offset&, const Offset&) = default;
  friend auto operator<=>(const Offset&, const Offset&) = default;
};

// W x H lattice with periodic wrap in both axes. Sites are numbered row-major.
class TorusGeometry {
 public:
  TorusGeometry(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return static_cast<std::size_t>(width_) * height_; }

  SiteIndex site(int x, int y) const;
  int x_of(SiteIndex s) const { return static_cast<int>(s % width_); }
  int y_of(SiteIndex s) const { return static_cast<int>(s / width_); }

  SiteIndex shift(SiteIndex s, Offset y) const;

  // The four nearest neighbours in the order +x, -x, +y, -y.
  std::array<SiteIndex, 4> nearest(SiteIndex s) const;

  // Unordered nearest-neighbour pairs: 2*W*H of them. Pair k joins site k/2
  // with its +x neighbour (k even) or its +y neighbour (k odd).
  std::size_t pair_count() const { return 2 * size(); }
  std::pair<SiteIndex, SiteIndex> pair(std::size_t k) const;

  friend bool operator==(const TorusGeometry&, const TorusGeometry&) = default;

 private:
  int width_;
  int height_;
};

// Offspring displacement distribution: offset y with probability p(y).
class DispersalKernel {
 public:
  DispersalKernel(std::vector<Offset> offsets, std::vector<double> probabilities);

  std::span<const Offset> offsets() const { return offsets_; }
  std::span<const double> probabilities() const { return probabilities_; }
  std::size_t size() const { return offsets_.size(); }
  bool uniform() const { return uniform_; }
  // Largest |dx| or |dy|.
  int reach() const { return reach_; }

 private:
  std::vector<Offset> offsets_;
  std::vector<double> probabilities_;
  bool uniform_ = false;
  int reach_ = 0;
};

// Uniform on {y : 0 < |y|_inf <= L}, i.e. the (2L+1)^2 box minus its centre.
DispersalKernel box_kernel(int range);

// Uniform on the four nearest neighbours.
DispersalKernel nearest_neighbor_kernel();

class StateGrid {
 public:
  StateGrid(TorusGeometry geometry, std::size_t alphabet, State fill = 0);

  const TorusGeometry& geometry() const { return geometry_; }
  std::size_t alphabet() const { return alphabet_; }
  std::size_t size() const { return states_.size(); }

  State operator[](SiteIndex s) const { return states_[s]; }
  void set(SiteIndex s, State value);
  void swap_sites(SiteIndex a, SiteIndex b);

  // Number of sites holding each state; kept current by set().
  std::size_t count(State value) const { return counts_[value]; }
  std::vector<double> fractions() const;

  std::span<const State> states() const { return states_; }

  friend bool operator==(const StateGrid&, const StateGrid&) = default;

 private:
  TorusGeometry geometry_;
  std::size_t alphabet_;
  std::vector<State> states_;
  std::array<std::size_t, kMaxStates> counts_{};
};

// Per-site hawk and dove counts.
class CountGrid {
 public:
  explicit CountGrid(TorusGeometry geometry);

  const TorusGeometry& geometry() const { return geometry_; }
  std::size_t size() const { return hawks_.size(); }

  std::uint32_t hawks(SiteIndex s) const { return hawks_[s]; }
  std::uint32_t doves(SiteIndex s) const { return doves_[s]; }
  std::uint32_t population(SiteIndex s) const { return hawks_[s] + doves_[s]; }

  void set(SiteIndex s, std::uint32_t hawks, std::uint32_t doves);
  void add_hawks(SiteIndex s, int delta);
  void add_doves(SiteIndex s, int delta);

  std::uint64_t total_hawks() const { return total_hawks_; }
  std::uint64_t total_doves() const { return total_doves_; }
  // Largest population over all sites.
  std::uint32_t max_population() const { return max_population_; }

  friend bool operator==(const CountGrid& a, const CountGrid& b) {
    return a.geometry_ == b.geometry_ && a.hawks_ == b.hawks_ && a.doves_ == b.doves_;
  }

 private:
  void track(std::uint32_t before, std::uint32_t after);

  TorusGeometry geometry_;
  std::vector<std::uint32_t> hawks_;
  std::vector<std::uint32_t> doves_;
  std::uint64_t total_hawks_ = 0;
  std::uint64_t total_doves_ = 0;
  std::vector<std::size_t> population_histogram_;
  std::uint32_t max_population_ = 0;
};

using Fractions = std::array<double, kMaxStates>;

// Kernel-weighted fraction of neighbours of `site` in each state.
Fractions neighbor_fractions(const StateGrid& grid, SiteIndex site, const DispersalKernel& kernel);

// Hawk fraction over the 5x5 square centred at `site` (centre included);
// nullopt when the square holds no individuals.
std::optional<double> square_fraction(const CountGrid& grid, SiteIndex site);

}  // namespace ipsim
