#pragma once

#include <cstdint>
#include <random>

namespace prle {

/// Seeded deterministic generator used for every random draw in the
/// library. Doubles are derived from the top 53 bits of mt19937_64 output
/// so the stream does not depend on the standard library's distribution
/// implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t raw() { return engine_(); }

  /// Uniform in [0, 1).
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double range(double lo, double hi) { return lo + unit() * (hi - lo); }

  /// Uniform in (lo, hi]: the top endpoint is attainable, the bottom is not.
  double range_excl_lo(double lo, double hi) {
    return hi - unit() * (hi - lo);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace prle
