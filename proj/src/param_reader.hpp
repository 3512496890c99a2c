#pragma once

#include <charconv>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ipsim/errors.hpp"
#include "ipsim/lattice.hpp"
#include "ipsim/models.hpp"

namespace ipsim::detail {

// Typed access to a ParamMap that remembers which keys were read, so that
// leftovers can be reported as unknown.
class ParamReader {
 public:
  explicit ParamReader(const ParamMap& params) : params_(params) {}

  bool has(const std::string& key) const { return params_.count(key) != 0; }

  std::string text(const std::string& key, const std::string& fallback) {
    used_.insert(key);
    auto it = params_.find(key);
    return it == params_.end() ? fallback : it->second;
  }

  double number(const std::string& key, double fallback) {
    used_.insert(key);
    auto it = params_.find(key);
    return it == params_.end() ? fallback : parse(key, it->second);
  }

  double number(const std::string& key) {
    if (!has(key)) throw ModelError("missing model parameter '" + key + "'");
    return number(key, 0.0);
  }

  std::vector<double> list(const std::string& key) {
    used_.insert(key);
    std::vector<double> values;
    auto it = params_.find(key);
    if (it == params_.end()) return values;
    std::string item;
    std::istringstream in(it->second);
    while (std::getline(in, item, ',')) values.push_back(parse(key, item));
    return values;
  }

  DispersalKernel kernel(const std::string& key, int fallback) {
    const double range = number(key, fallback);
    if (range < 0 || range != std::floor(range)) {
      throw ModelError("'" + key + "' must be a non-negative integer");
    }
    return range == 0 ? nearest_neighbor_kernel() : box_kernel(static_cast<int>(range));
  }

  void finish() const {
    for (const auto& [key, value] : params_) {
      if (!used_.count(key)) throw ModelError("unknown model parameter '" + key + "'");
    }
  }

 private:
  static double parse(const std::string& key, std::string value) {
    value.erase(0, value.find_first_not_of(" \t"));
    value.erase(value.find_last_not_of(" \t") + 1);
    if (value == "inf" || value == "infinity") return std::numeric_limits<double>::infinity();
    double out = 0.0;
    const auto* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end || value.empty()) {
      throw ModelError("parameter '" + key + "' is not a number: '" + value + "'");
    }
    return out;
  }

  const ParamMap& params_;
  std::set<std::string> used_;
};


// `matrix = cyclic` (beta1..3), `silvertown`, or `explicit` (types, lambda).
InvasionMatrix read_invasion_matrix(ParamReader& in);

}  // namespace ipsim::detail
