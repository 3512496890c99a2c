#include "ipsim/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <string>

#include "ipsim/errors.hpp"

namespace ipsim {

TorusGeometry::TorusGeometry(int width, int height) : width_(width), height_(height) {
  if (width < 2 || height < 2) {
    throw ConfigError("torus needs width >= 2 and height >= 2, got " + std::to_string(width) +
                      "x" + std::to_string(height));
  }
}

SiteIndex TorusGeometry::site(int x, int y) const {
  x %= width_;
  y %= height_;
  if (x < 0) x += width_;
  if (y < 0) y += height_;
  return static_cast<SiteIndex>(y) * width_ + x;
}

SiteIndex TorusGeometry::shift(SiteIndex s, Offset d) const {
  return site(x_of(s) + d.dx, y_of(s) + d.dy);
}

std::array<SiteIndex, 4> TorusGeometry::nearest(SiteIndex s) const {
  const int x = x_of(s);
  const int y = y_of(s);
  const int xp = x + 1 == width_ ? 0 : x + 1;
  const int xm = x == 0 ? width_ - 1 : x - 1;
  const int yp = y + 1 == height_ ? 0 : y + 1;
  const int ym = y == 0 ? height_ - 1 : y - 1;
  const auto row = static_cast<SiteIndex>(y) * width_;
  return {row + xp, row + xm, static_cast<SiteIndex>(yp) * width_ + x,
          static_cast<SiteIndex>(ym) * width_ + x};
}

std::pair<SiteIndex, SiteIndex> TorusGeometry::pair(std::size_t k) const {
  const SiteIndex s = k / 2;
  const auto nn = nearest(s);
  return {s, (k % 2 == 0) ? nn[0] : nn[2]};
}

DispersalKernel::DispersalKernel(std::vector<Offset> offsets, std::vector<double> probabilities)
    : offsets_(std::move(offsets)), probabilities_(std::move(probabilities)) {
  if (offsets_.empty() || offsets_.size() != probabilities_.size()) {
    throw ModelError("dispersal kernel needs one probability per offset");
  }
  double total = 0.0;
  for (double p : probabilities_) {
    if (!(p >= 0.0)) throw ModelError("dispersal probabilities must be non-negative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ModelError("dispersal probabilities must sum to 1");
  auto sorted = offsets_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ModelError("dispersal offsets must be distinct");
  }
  for (const auto& y : offsets_) {
    if (y == Offset{}) throw ModelError("dispersal offset (0,0) is not allowed");
    reach_ = std::max({reach_, std::abs(y.dx), std::abs(y.dy)});
  }
  uniform_ = std::all_of(probabilities_.begin(), probabilities_.end(),
                         [&](double p) { return p == probabilities_.front(); });
}

DispersalKernel box_kernel(int range) {
  if (range < 1) throw ModelError("box kernel range must be >= 1");
  std::vector<Offset> offsets;
  for (int dy = -range; dy <= range; ++dy) {
    for (int dx = -range; dx <= range; ++dx) {
      if (dx != 0 || dy != 0) offsets.push_back({dx, dy});
    }
  }
  std::vector<double> p(offsets.size(), 1.0 / static_cast<double>(offsets.size()));
  return DispersalKernel(std::move(offsets), std::move(p));
}

DispersalKernel nearest_neighbor_kernel() {
  return DispersalKernel({{1, 0}, {-1, 0}, {0, 1}, {0, -1}}, {0.25, 0.25, 0.25, 0.25});
}

StateGrid::StateGrid(TorusGeometry geometry, std::size_t alphabet, State fill)
    : geometry_(geometry), alphabet_(alphabet), states_(geometry.size(), fill) {
  if (alphabet < 1 || alphabet > kMaxStates) throw ModelError("alphabet size out of range");
  if (fill >= alphabet) throw ModelError("fill state outside alphabet");
  counts_[fill] = states_.size();
}

void StateGrid::set(SiteIndex s, State value) {
  if (value >= alphabet_) throw ModelError("state " + std::to_string(value) + " outside alphabet");
  --counts_[states_[s]];
  ++counts_[value];
  states_[s] = value;
}

void StateGrid::swap_sites(SiteIndex a, SiteIndex b) { std::swap(states_[a], states_[b]); }

std::vector<double> StateGrid::fractions() const {
  std::vector<double> f(alphabet_);
  const double n = static_cast<double>(states_.size());
  for (std::size_t i = 0; i < alphabet_; ++i) f[i] = static_cast<double>(counts_[i]) / n;
  return f;
}

CountGrid::CountGrid(TorusGeometry geometry)
    : geometry_(geometry),
      hawks_(geometry.size(), 0),
      doves_(geometry.size(), 0),
      population_histogram_(1, geometry.size()) {}

void CountGrid::track(std::uint32_t before, std::uint32_t after) {
  --population_histogram_[before];
  if (after >= population_histogram_.size()) population_histogram_.resize(after + 1, 0);
  ++population_histogram_[after];
  if (after > max_population_) max_population_ = after;
  while (max_population_ > 0 && population_histogram_[max_population_] == 0) --max_population_;
}

void CountGrid::set(SiteIndex s, std::uint32_t hawks, std::uint32_t doves) {
  const auto before = population(s);
  total_hawks_ = total_hawks_ - hawks_[s] + hawks;
  total_doves_ = total_doves_ - doves_[s] + doves;
  hawks_[s] = hawks;
  doves_[s] = doves;
  track(before, population(s));
}

void CountGrid::add_hawks(SiteIndex s, int delta) {
  if (delta < 0 && hawks_[s] < static_cast<std::uint32_t>(-delta)) {
    throw ModelError("hawk count would become negative");
  }
  set(s, static_cast<std::uint32_t>(static_cast<int>(hawks_[s]) + delta), doves_[s]);
}

void CountGrid::add_doves(SiteIndex s, int delta) {
  if (delta < 0 && doves_[s] < static_cast<std::uint32_t>(-delta)) {
    throw ModelError("dove count would become negative");
  }
  set(s, hawks_[s], static_cast<std::uint32_t>(static_cast<int>(doves_[s]) + delta));
}

Fractions neighbor_fractions(const StateGrid& grid, SiteIndex site, const DispersalKernel& kernel) {
  Fractions f{};
  const auto& geo = grid.geometry();
  const auto offsets = kernel.offsets();
  const auto probs = kernel.probabilities();
  for (std::size_t k = 0; k < offsets.size(); ++k) {
    f[grid[geo.shift(site, offsets[k])]] += probs[k];
  }
  return f;
}

std::optional<double> square_fraction(const CountGrid& grid, SiteIndex site) {
  const auto& geo = grid.geometry();
  std::uint64_t hawks = 0;
  std::uint64_t total = 0;
  for (int dy = -2; dy <= 2; ++dy) {
    for (int dx = -2; dx <= 2; ++dx) {
      const auto s = geo.shift(site, {dx, dy});
      hawks += grid.hawks(s);
      total += grid.population(s);
    }
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(hawks) / static_cast<double>(total);
}

}  // namespace ipsim
