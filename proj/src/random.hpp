#pragma once

// Portable seeded randomness: std distributions are implementation-defined, so
// draws are derived from the raw engine output directly.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "contextkg/geometry.hpp"

namespace ckg::rng {

class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return n ? engine_() % n : 0; }

  Point unit_vector() {
    const double a = uniform(0.0, 2.0 * std::numbers::pi);
    return {std::cos(a), std::sin(a)};
  }
  /// Uniform point in a disc of the given radius centered at the origin.
  Point in_disc(double radius) {
    const double r = radius * std::sqrt(uniform());
    return unit_vector() * r;
  }

 private:
  std::mt19937_64 engine_;
};

/// Mixes a base seed with a stream tag so independent passes draw independent streams.
inline std::uint64_t derive(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace ckg::rng
