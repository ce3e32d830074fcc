#pragma once

#include <cstdint>
#include <random>

namespace skipstop {

/// Portable seeded generator.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The standard library distributions are not portable across
/// implementations, so every variate drawn in this project goes through the
/// helpers below, which only use the raw 64-bit engine output. Streams for
/// parallel work are derived with SplitMix64 so that each (seed, stream)
/// pair yields the same numbers regardless of thread scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t seed, std::uint64_t stream)
      : engine_(mix(seed, stream)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via Box-Muller (one of the pair is discarded).
  double normal();

  /// Poisson variate. Knuth's product method on chunks of mean <= 16,
  /// summed, so the cost is linear in the mean.
  std::uint64_t poisson(double mean);

  static std::uint64_t splitmix64(std::uint64_t x);
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x9E3779B97F4A7C15ULL));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace skipstop
