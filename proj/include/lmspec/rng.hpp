#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace lmspec {

using Rng = std::mt19937_64;

/// Independent stream `index` derived from a master seed. Streams are a pure
/// function of (seed, index): the same pair always yields the same sequence.
inline Rng make_stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32), 0x6c6d7370u};
  return Rng(seq);
}

/// Streams 0..count-1 of `seed`.
inline std::vector<Rng> make_streams(std::uint64_t seed, std::size_t count) {
  std::vector<Rng> streams;
  streams.reserve(count);
  for (std::size_t i = 0; i < count; ++i) streams.push_back(make_stream(seed, i));
  return streams;
}

/// Uniform draw on the open interval (0, 1).
inline double uniform_open(Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = 0.0;
  do {
    u = unif(rng);
  } while (u <= 0.0);
  return u;
}

inline double standard_normal(Rng& rng) {
  std::normal_distribution<double> norm(0.0, 1.0);
  return norm(rng);
}

}  // namespace lmspec
