#include "ipsim/output.hpp"

#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ipsim/config.hpp"
#include "ipsim/errors.hpp"

namespace ipsim {

std::string trace_csv(const DensityTrace& trace) {
  std::string out = "t";
  for (const auto& c : trace.columns) out += "," + c;
  out += '\n';
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    out += format_double(trace.times[k]);
    for (double v : trace.rows[k]) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

DensityTrace parse_trace_csv(std::string_view text) {
  DensityTrace trace;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty CSV");
  {
    std::istringstream header(line);
    std::string cell;
    std::getline(header, cell, ',');
    if (cell != "t") throw IoError("CSV header must start with 't'");
    while (std::getline(header, cell, ',')) trace.columns.push_back(cell);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(row, cell, ',')) {
      double v = 0.0;
      const char* end = cell.data() + cell.size();
      auto [ptr, ec] = std::from_chars(cell.data(), end, v);
      if (ec != std::errc() || ptr != end) throw IoError("bad CSV value '" + cell + "'");
      values.push_back(v);
    }
    if (values.size() != trace.columns.size() + 1) throw IoError("CSV row has the wrong width");
    trace.times.push_back(values.front());
    trace.rows.emplace_back(values.begin() + 1, values.end());
  }
  return trace;
}

Palette default_palette() {
  return {Rgb{255, 255, 255}, Rgb{0, 0, 0},     Rgb{128, 128, 128}, Rgb{192, 192, 192},
          Rgb{200, 40, 40},   Rgb{40, 160, 40}, Rgb{40, 40, 200},   Rgb{220, 180, 40}};
}

std::string ppm_bytes(const StateGrid& grid, const Palette& palette) {
  if (palette.size() < grid.alphabet()) throw ModelError("palette does not cover the alphabet");
  const auto& g = grid.geometry();
  std::string out = "P6\n" + std::to_string(g.width()) + " " + std::to_string(g.height()) + "\n255\n";
  out.reserve(out.size() + 3 * grid.size());
  for (SiteIndex s = 0; s < grid.size(); ++s) {
    const auto& rgb = palette[grid[s]];
    out.append(reinterpret_cast<const char*>(rgb.data()), 3);
  }
  return out;
}

void write_file_atomic(const std::string& path, std::string_view bytes) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  std::error_code ec;
  if (target.has_parent_path()) fs::create_directories(target.parent_path(), ec);
  if (ec) throw IoError("cannot create directory for '" + path + "': " + ec.message());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("write to '" + tmp + "' failed");
  }
  fs::rename(tmp, target, ec);
  if (ec) throw IoError("cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

namespace {

// Little-endian fixed-width encoding.
class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(std::string_view s) {
    u64(s.size());
    out_.append(s);
  }
  void raw(std::string_view s) { out_.append(s); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(in_[pos_++]);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{u8()} << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{u8()} << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const auto n = u64();
    need(n);
    std::string s(in_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::string_view raw(std::size_t n) {
    need(n);
    auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }
  // Element count that cannot exceed the bytes left, each element taking
  // at least `width` bytes.
  std::size_t count(std::size_t width) {
    const auto n = u64();
    if (n > (in_.size() - pos_) / width) throw IoError("checkpoint is truncated");
    return static_cast<std::size_t>(n);
  }

 private:
  void need(std::uint64_t n) const {
    if (n > in_.size() - pos_) throw IoError("checkpoint is truncated");
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string checkpoint_bytes(const Checkpoint& cp) {
  Writer w;
  w.raw(std::string_view(kCheckpointMagic, 8));
  w.u32(kCheckpointVersion);
  w.str(cp.config_text);
  w.u64(cp.replicate);
  w.u32(static_cast<std::uint32_t>(cp.width));
  w.u32(static_cast<std::uint32_t>(cp.height));
  w.u8(cp.counts ? 1 : 0);
  w.u32(cp.alphabet);
  w.u64(cp.states.size());
  for (auto s : cp.states) w.u8(s);
  w.u64(cp.hawks.size());
  for (auto h : cp.hawks) w.u32(h);
  w.u64(cp.doves.size());
  for (auto d : cp.doves) w.u32(d);
  w.f64(cp.clock.time);
  w.u64(cp.clock.events);
  w.u64(cp.clock.proposals);
  w.u64(cp.next_sample);
  w.u8(cp.absorbed ? 1 : 0);
  w.str(cp.rng_state);
  w.u64(cp.trace.columns.size());
  for (const auto& c : cp.trace.columns) w.str(c);
  w.u64(cp.trace.times.size());
  for (std::size_t k = 0; k < cp.trace.times.size(); ++k) {
    w.f64(cp.trace.times[k]);
    for (double v : cp.trace.rows[k]) w.f64(v);
  }
  return w.take();
}

Checkpoint parse_checkpoint(std::string_view bytes) {
  Reader r(bytes);
  if (r.raw(8) != std::string_view(kCheckpointMagic, 8)) throw IoError("not a checkpoint file");
  if (r.u32() != kCheckpointVersion) throw IoError("unsupported checkpoint version");
  Checkpoint cp;
  cp.config_text = r.str();
  cp.replicate = r.u64();
  cp.width = static_cast<int>(r.u32());
  cp.height = static_cast<int>(r.u32());
  cp.counts = r.u8() != 0;
  cp.alphabet = r.u32();
  cp.states.resize(r.count(1));
  for (auto& s : cp.states) s = r.u8();
  cp.hawks.resize(r.count(4));
  for (auto& h : cp.hawks) h = r.u32();
  cp.doves.resize(r.count(4));
  for (auto& d : cp.doves) d = r.u32();
  cp.clock.time = r.f64();
  cp.clock.events = r.u64();
  cp.clock.proposals = r.u64();
  cp.next_sample = r.u64();
  cp.absorbed = r.u8() != 0;
  cp.rng_state = r.str();
  cp.trace.columns.resize(r.count(8));
  for (auto& c : cp.trace.columns) c = r.str();
  const auto rows = r.count(8);
  for (std::uint64_t k = 0; k < rows; ++k) {
    cp.trace.times.push_back(r.f64());
    std::vector<double> row(cp.trace.columns.size());
    for (auto& v : row) v = r.f64();
    cp.trace.rows.push_back(std::move(row));
  }
  if (!r.done()) throw IoError("checkpoint has trailing bytes");
  return cp;
}

}  // namespace ipsim
