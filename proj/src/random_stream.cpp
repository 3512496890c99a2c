#include "ipsim/random_stream.hpp"

#include <cmath>
#include <sstream>

#include "ipsim/errors.hpp"

namespace ipsim {

RandomStream::RandomStream(std::uint64_t master_seed, std::uint64_t stream_index)
    : seed_(master_seed), index_(stream_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(stream_index),
                    static_cast<std::uint32_t>(stream_index >> 32),
                    0x9e3779b9u};
  engine_.seed(seq);
}

double RandomStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RandomStream::exponential(double rate) {
  return -std::log(uniform_open_low()) / rate;
}

std::uint64_t RandomStream::index(std::uint64_t n) {
  // Lemire's nearly-divisionless bounded integer.
  unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(engine_()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

std::string RandomStream::serialize() const {
  std::ostringstream out;
  out << seed_ << ' ' << index_ << ' ' << engine_;
  return out.str();
}

void RandomStream::restore(const std::string& state) {
  std::istringstream in(state);
  in >> seed_ >> index_ >> engine_;
  if (!in) throw IoError("corrupt random stream state");
}

}  // namespace ipsim
