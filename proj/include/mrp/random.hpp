#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace mrp {

using Rng = std::mt19937_64;

/// Per-trial generator; trial streams are seeded with seed + index.
inline Rng make_rng(std::uint64_t seed, std::uint64_t index = 0) { return Rng(seed + index); }

/// Uniform double in [0, 1) from the top 53 bits; identical across standard
/// libraries, unlike std::uniform_real_distribution.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Index drawn from a discrete distribution by inverse CDF. Zero-weight
/// entries are never returned.
inline int sample_index(Rng& rng, std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  const double u = uniform01(rng) * total;
  double acc = 0.0;
  int last_positive = -1;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last_positive = static_cast<int>(i);
    acc += weights[i];
    if (u < acc) return last_positive;
  }
  return last_positive;
}

}  // namespace mrp
