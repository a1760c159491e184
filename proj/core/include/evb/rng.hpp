#pragma once

#include <cstdint>
#include <random>

namespace evb {

using Rng = std::mt19937_64;

// Independent substream `stream` of `seed`. Deterministic across runs.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  return Rng(seq);
}

// Derives a child seed, e.g. one per method or per sweep point.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  Rng rng = make_rng(seed, stream);
  return rng();
}

inline double std_normal(Rng& rng) {
  std::normal_distribution<double> dist;
  return dist(rng);
}

inline double uniform01(Rng& rng) {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

}  // namespace evb
