#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace dpcm {

/// Deterministic random stream. The engine is std::mt19937_64 (whose output
/// sequence is fixed by the standard); every sampler on top of it is
/// hand-rolled so that results never depend on the standard library's
/// distribution implementations. Identical (seed, call sequence) therefore
/// gives bit-identical outputs on any conforming platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(scramble(seed)) {}

  /// Independent stream for a substructure (tree index, run index, ...).
  /// The xor follows the documented seed-derivation contract; the scramble
  /// inside the constructor decorrelates adjacent streams.
  static Rng derived(std::uint64_t seed, std::uint64_t stream) {
    return Rng(seed ^ stream);
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform on (0, 1); safe as a log() argument.
  double uniform01_open() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Unbiased integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  /// Standard normal via Box-Muller. Draws exactly two engine values.
  double normal() {
    const double u1 = uniform01_open();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925286766559 * u2);
  }

  /// Laplace(0, scale) via inverse CDF. Draws exactly one engine value.
  double laplace(double scale) {
    const double u = uniform01_open() - 0.5;
    const double sign = u < 0.0 ? -1.0 : 1.0;
    return -scale * sign * std::log1p(-2.0 * std::abs(u));
  }

 private:
  // splitmix64 finalizer; turns nearby seeds into unrelated engine states.
  static std::uint64_t scramble(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
};

}  // namespace dpcm
