#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace ipsim {

// One reproducible stream per (master seed, replicate index). Draws are
// produced from raw engine output so that sequences do not depend on the
// standard library's distribution implementations.
class RandomStream {
 public:
  RandomStream(std::uint64_t master_seed, std::uint64_t stream_index);

  std::uint64_t master_seed() const { return seed_; }
  std::uint64_t stream_index() const { return index_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform();

  // Uniform on (0, 1].
  double uniform_open_low() { return 1.0 - uniform(); }

  // Exponential with the given rate (> 0).
  double exponential(double rate);

  // Uniform integer in [0, n), unbiased. n must be > 0.
  std::uint64_t index(std::uint64_t n);

  // Full engine state, for checkpoints.
  std::string serialize() const;
  void restore(const std::string& state);

  bool operator==(const RandomStream& other) const { return engine_ == other.engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t index_;
  std::mt19937_64 engine_;
};

}  // namespace ipsim
