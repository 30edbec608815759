#pragma once

#include <cstdint>
#include <random>
#include <span>

#include <Eigen/Dense>

namespace rlsp {

using Rng = std::mt19937_64;

/// Independent generator for (seed, stream); used to give each rollout or worker its own stream.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), 0x5eedu};
  return Rng(seq);
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline double standard_normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

/// Draws an index from unnormalized nonnegative weights.
template <class Weights>
int sample_categorical(const Weights& w, Rng& rng) {
  double total = 0.0;
  const auto n = static_cast<int>(w.size());
  for (int i = 0; i < n; ++i) total += w[i];
  double u = uniform01(rng) * total;
  int last_positive = 0;
  for (int i = 0; i < n; ++i) {
    if (w[i] <= 0.0) continue;
    last_positive = i;
    if (u < w[i]) return i;
    u -= w[i];
  }
  return last_positive;
}

inline int uniform_int(int lo, int hi_inclusive, Rng& rng) {
  return std::uniform_int_distribution<int>(lo, hi_inclusive)(rng);
}

}  // namespace rlsp
