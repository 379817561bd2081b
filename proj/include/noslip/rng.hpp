#pragma once

#include <cstdint>

#include "noslip/core.hpp"

namespace noslip {

// Splittable counter-based generator: every (seed, stream index) pair yields
// an independent deterministic sequence, so batch drivers can hand stream i
// to particle i regardless of thread scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(mix64(seed ^ 0x9e3779b97f4a7c15ull)) {}
  Rng(std::uint64_t seed, std::uint64_t stream)
      : state_(mix64(mix64(seed + 0x9e3779b97f4a7c15ull) ^
                     mix64(stream * 0xbf58476d1ce4e5b9ull + 0x94d049bb133111ebull))) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix64(state_);
  }

  /// Uniform double in [0, 1).
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Unit vector with polar angle uniform in [lo, hi).
  Vec2 unit_vector(double lo = 0.0, double hi = 2.0 * kPi) {
    const double a = uniform(lo, hi);
    return {std::cos(a), std::sin(a)};
  }

  /// Standard normal via Box-Muller (one value per call, no cache).
  double gaussian() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  static std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  }

 private:
  std::uint64_t state_;
};

} // namespace noslip
