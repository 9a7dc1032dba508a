#pragma once

#include <cstdint>

namespace timebin {

/// Deterministic pseudo-random generator with reproducible cross-platform
/// output.  The core generator is xoshiro256++ seeded through SplitMix64;
/// all distributions are implemented on top of the raw 64-bit stream so a
/// given (seed, call sequence) pair produces byte-identical results on any
/// conforming compiler.
class Rng {
 public:
  /// Seeds the generator state from a single 64-bit value via SplitMix64.
  explicit Rng(std::uint64_t seed);

  /// Returns an independent generator for the given block index.  Streams
  /// produced from the same seed but different block indices are
  /// decorrelated, which makes per-point sweep streams reproducible
  /// regardless of evaluation order.
  static Rng substream(std::uint64_t seed, std::uint64_t block);

  /// Raw 64-bit output of the underlying generator.
  std::uint64_t next_u64();

  /// Uniform double in [0, 1) with 53 bits of resolution.
  double uniform();

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi);

  /// Returns true with probability p (clamped to [0, 1]).
  bool bernoulli(double p);

  /// Standard normal deviate (Box-Muller, internally cached in pairs).
  double normal();

  /// Normal deviate with the given mean and standard deviation.
  double normal(double mean, double sigma);

  /// Exponential deviate with the given rate (mean 1/rate).
  double exponential(double rate);

  /// Poisson deviate with the given mean (mean >= 0).  Large means are
  /// generated as sums over bounded-mean chunks, which is exact by the
  /// additivity of the Poisson distribution and costs O(result).
  std::uint64_t poisson(double mean);

 private:
  std::uint64_t state_[4];
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace timebin
