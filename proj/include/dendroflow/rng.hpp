#pragma once

#include <cmath>
#include <cstdint>

namespace dendroflow {

// SplitMix64 stream. Counter-based and splittable: the k-th output is a pure
// function of (seed, k), and replicate streams are derived by hashing
// (master_seed, replicate_index), so Monte Carlo results do not depend on
// thread scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1), 53-bit resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in (0, 1]; safe as a log() argument.
  double next_open() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  /// Standard normal via Box-Muller. Consumes exactly two uniforms per call.
  double next_gaussian() {
    double u = next_open();
    double v = next_double();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * 3.14159265358979323846 * v);
  }

  double next_exponential(double rate) { return -std::log(next_open()) / rate; }

  bool next_bernoulli(double p) { return next_double() < p; }

 private:
  std::uint64_t state_;
};

/// Seed for replicate `index` of a master seed; distinct indexes give
/// statistically independent SplitMix64 streams.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master ^ (0x9E3779B97F4A7C15ull * (index + 0x632BE59BD9B4E019ull));
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace dendroflow
