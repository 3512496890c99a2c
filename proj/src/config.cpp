#include "ipsim/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "ipsim/errors.hpp"

namespace ipsim {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  if (trim(s).empty()) return parts;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) parts.push_back(trim(item));
  return parts;
}

double to_double(const std::string& key, const std::string& value) {
  if (value == "inf" || value == "infinity") return std::numeric_limits<double>::infinity();
  double out = 0.0;
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (value.empty() || ec != std::errc() || ptr != end) {
    throw ConfigError("'" + key + "' expects a number, got '" + value + "'");
  }
  return out;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (value.empty() || ec != std::errc() || ptr != end) {
    throw ConfigError("'" + key + "' expects a non-negative integer, got '" + value + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("'" + key + "' expects true or false, got '" + value + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const auto& item : split(value, ',')) out.push_back(to_double(key, item));
  return out;
}

std::vector<std::array<std::uint8_t, 3>> to_palette(const std::string& value) {
  std::vector<std::array<std::uint8_t, 3>> out;
  for (const auto& colour : split(value, ';')) {
    const auto parts = split(colour, ',');
    if (parts.size() != 3) throw ConfigError("palette entries need three channels: '" + colour + "'");
    std::array<std::uint8_t, 3> rgb{};
    for (int c = 0; c < 3; ++c) {
      const auto v = to_unsigned("palette", parts[c]);
      if (v > 255) throw ConfigError("palette channel out of range: " + parts[c]);
      rgb[c] = static_cast<std::uint8_t>(v);
    }
    out.push_back(rgb);
  }
  return out;
}

std::string list_text(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_double(values[i]);
  }
  return out;
}

InitialKind to_initial_kind(const std::string& value) {
  if (value == "random") return InitialKind::Random;
  if (value == "uniform") return InitialKind::Uniform;
  if (value == "front") return InitialKind::Front;
  if (value == "counts") return InitialKind::Counts;
  throw ConfigError("unknown initial condition kind '" + value + "'");
}

const std::set<std::string> kSections = {"model", "geometry", "initial", "run",  "output",
                                         "coexistence", "sweep", "ode",   "pde"};

}  // namespace

std::string_view initial_kind_name(InitialKind kind) {
  switch (kind) {
    case InitialKind::Random: return "random";
    case InitialKind::Uniform: return "uniform";
    case InitialKind::Front: return "front";
    case InitialKind::Counts: return "counts";
  }
  return "?";
}

std::string format_double(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::vector<double> ExperimentConfig::sample_times() const {
  std::vector<double> times;
  if (!(sample_every > 0.0)) return {0.0};
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * sample_every;
    if (t > horizon * (1.0 + 1e-12)) break;
    times.push_back(std::min(t, horizon));
  }
  if (times.back() < horizon) times.push_back(horizon);
  return times;
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  std::string section;
  std::set<std::pair<std::string, std::string>> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!kSections.count(section)) throw ConfigError(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    if (section.empty()) throw ConfigError(where + "key outside any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "empty key");
    if (!seen.insert({section, key}).second) {
      throw ConfigError(where + "duplicate key '" + key + "' in [" + section + "]");
    }
    const auto unknown = [&] {
      return ConfigError(where + "unknown key '" + key + "' in [" + section + "]");
    };

    if (section == "model") {
      if (key == "name") {
        cfg.model = value;
      } else {
        cfg.params[key] = value;
      }
    } else if (section == "geometry") {
      if (key == "width") {
        cfg.width = static_cast<int>(to_unsigned(key, value));
      } else if (key == "height") {
        cfg.height = static_cast<int>(to_unsigned(key, value));
      } else {
        throw unknown();
      }
    } else if (section == "initial") {
      if (key == "kind") {
        cfg.initial.kind = to_initial_kind(value);
      } else if (key == "densities") {
        cfg.initial.densities = to_list(key, value);
      } else if (key == "state") {
        cfg.initial.state = static_cast<int>(to_unsigned(key, value));
      } else if (key == "hawks") {
        cfg.initial.hawks = static_cast<std::uint32_t>(to_unsigned(key, value));
      } else if (key == "doves") {
        cfg.initial.doves = static_cast<std::uint32_t>(to_unsigned(key, value));
      } else {
        throw unknown();
      }
    } else if (section == "run") {
      if (key == "horizon") {
        cfg.horizon = to_double(key, value);
      } else if (key == "sample_every") {
        cfg.sample_every = to_double(key, value);
      } else if (key == "replicates") {
        cfg.replicates = to_unsigned(key, value);
      } else if (key == "seed") {
        cfg.seed = to_unsigned(key, value);
      } else if (key == "threads") {
        cfg.threads = to_unsigned(key, value);
      } else if (key == "stirring") {
        cfg.stirring = to_double(key, value);
      } else if (key == "checkpoint_every") {
        cfg.checkpoint_every = to_double(key, value);
      } else if (key == "resume") {
        cfg.resume = to_bool(key, value);
      } else {
        throw unknown();
      }
    } else if (section == "output") {
      if (key == "directory") {
        cfg.output = value;
      } else if (key == "snapshots") {
        cfg.snapshot_times = to_list(key, value);
      } else if (key == "palette") {
        cfg.palette = to_palette(value);
      } else {
        throw unknown();
      }
    } else if (section == "coexistence") {
      if (key == "threshold") {
        cfg.threshold = to_double(key, value);
      } else if (key == "window") {
        cfg.window = to_double(key, value);
      } else {
        throw unknown();
      }
    } else if (section == "sweep") {
      if (key == "axis") {
        cfg.sweep_axis = value;
      } else if (key == "values") {
        cfg.sweep_values = to_list(key, value);
      } else {
        throw unknown();
      }
    } else if (section == "ode") {
      if (key == "system") {
        cfg.ode.system = value;
      } else if (key == "u0") {
        cfg.ode.u0 = to_list(key, value);
      } else if (key == "horizon") {
        cfg.ode.horizon = to_double(key, value);
      } else if (key == "tol") {
        cfg.ode.tol = to_double(key, value);
      } else if (key == "sample_every") {
        cfg.ode.sample_every = to_double(key, value);
      } else {
        cfg.ode.params[key] = value;
      }
    } else if (section == "pde") {
      if (key == "reaction") {
        cfg.pde.reaction = value;
      } else if (key == "cells") {
        cfg.pde.cells = to_unsigned(key, value);
      } else if (key == "dx") {
        cfg.pde.dx = to_double(key, value);
      } else if (key == "dt") {
        cfg.pde.dt = to_double(key, value);
      } else if (key == "horizon") {
        cfg.pde.horizon = to_double(key, value);
      } else if (key == "sample_every") {
        cfg.pde.sample_every = to_double(key, value);
      } else if (key == "bracket") {
        cfg.pde.bracket = to_list(key, value);
      } else if (key == "tol") {
        cfg.pde.tol = to_double(key, value);
      } else {
        cfg.pde.params[key] = value;
      }
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string emit_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "[model]\nname = " << c.model << '\n';
  for (const auto& [k, v] : c.params) out << k << " = " << v << '\n';
  out << "\n[geometry]\nwidth = " << c.width << "\nheight = " << c.height << '\n';
  out << "\n[initial]\nkind = " << initial_kind_name(c.initial.kind)
      << "\ndensities = " << list_text(c.initial.densities) << "\nstate = " << c.initial.state
      << "\nhawks = " << c.initial.hawks << "\ndoves = " << c.initial.doves << '\n';
  out << "\n[run]\nhorizon = " << format_double(c.horizon)
      << "\nsample_every = " << format_double(c.sample_every) << "\nreplicates = " << c.replicates
      << "\nseed = " << c.seed << "\nthreads = " << c.threads
      << "\nstirring = " << format_double(c.stirring)
      << "\ncheckpoint_every = " << format_double(c.checkpoint_every)
      << "\nresume = " << (c.resume ? "true" : "false") << '\n';
  out << "\n[output]\ndirectory = " << c.output << "\nsnapshots = " << list_text(c.snapshot_times)
      << "\npalette = ";
  for (std::size_t i = 0; i < c.palette.size(); ++i) {
    if (i) out << ';';
    out << int(c.palette[i][0]) << ',' << int(c.palette[i][1]) << ',' << int(c.palette[i][2]);
  }
  out << "\n\n[coexistence]\nthreshold = " << format_double(c.threshold)
      << "\nwindow = " << format_double(c.window) << '\n';
  out << "\n[sweep]\naxis = " << c.sweep_axis << "\nvalues = " << list_text(c.sweep_values) << '\n';
  out << "\n[ode]\nsystem = " << c.ode.system << "\nu0 = " << list_text(c.ode.u0)
      << "\nhorizon = " << format_double(c.ode.horizon) << "\ntol = " << format_double(c.ode.tol)
      << "\nsample_every = " << format_double(c.ode.sample_every) << '\n';
  for (const auto& [k, v] : c.ode.params) out << k << " = " << v << '\n';
  out << "\n[pde]\nreaction = " << c.pde.reaction << "\ncells = " << c.pde.cells
      << "\ndx = " << format_double(c.pde.dx) << "\ndt = " << format_double(c.pde.dt)
      << "\nhorizon = " << format_double(c.pde.horizon)
      << "\nsample_every = " << format_double(c.pde.sample_every)
      << "\nbracket = " << list_text(c.pde.bracket) << "\ntol = " << format_double(c.pde.tol)
      << '\n';
  for (const auto& [k, v] : c.pde.params) out << k << " = " << v << '\n';
  return out.str();
}

void validate(const ExperimentConfig& c) {
  if (!c.model.empty()) {
    const auto names = model_names();
    if (std::find(names.begin(), names.end(), c.model) == names.end()) {
      throw ConfigError("unknown model '" + c.model + "'");
    }
  }
  if (c.width < 2 || c.height < 2) throw ConfigError("width and height must be at least 2");
  if (!(c.horizon >= 0.0) || !std::isfinite(c.horizon)) {
    throw ConfigError("horizon must be finite and non-negative");
  }
  if (!(c.sample_every > 0.0)) throw ConfigError("sample_every must be positive");
  if (c.replicates == 0) throw ConfigError("replicates must be at least 1");
  if (c.threads == 0) throw ConfigError("threads must be at least 1");
  if (!(c.stirring >= 0.0)) throw ConfigError("stirring epsilon must be non-negative");
  if (!(c.checkpoint_every >= 0.0)) throw ConfigError("checkpoint_every must be non-negative");
  if (!(c.threshold >= 0.0 && c.threshold <= 1.0)) throw ConfigError("threshold must be in [0, 1]");
  if (!(c.window > 0.0 && c.window <= 1.0)) throw ConfigError("window must be in (0, 1]");
  for (double d : c.initial.densities) {
    if (!(d >= 0.0 && d <= 1.0)) throw ConfigError("initial densities must lie in [0, 1]");
  }
  for (double t : c.snapshot_times) {
    if (!(t >= 0.0 && t <= c.horizon)) throw ConfigError("snapshot times must lie in [0, horizon]");
  }
}

}  // namespace ipsim
