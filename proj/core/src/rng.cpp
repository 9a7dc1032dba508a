#include "timebin/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace timebin {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix64(std::uint64_t& x) {
  x += kGolden;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t s = seed;
  for (auto& word : state_) {
    word = splitmix64(s);
  }
}

Rng Rng::substream(std::uint64_t seed, std::uint64_t block) {
  return Rng(seed ^ ((block + 1) * kGolden));
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

bool Rng::bernoulli(double p) {
  if (p <= 0.0) {
    return false;
  }
  if (p >= 1.0) {
    return true;
  }
  return uniform() < p;
}

double Rng::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) {
    u1 = uniform();
  }
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * M_PI * u2;
  cached_normal_ = radius * std::sin(angle);
  has_cached_normal_ = true;
  return radius * std::cos(angle);
}

double Rng::normal(double mean, double sigma) {
  return mean + sigma * normal();
}

double Rng::exponential(double rate) {
  if (!(rate > 0.0)) {
    throw std::invalid_argument("exponential rate must be positive");
  }
  double u = uniform();
  while (u <= 0.0) {
    u = uniform();
  }
  return -std::log(u) / rate;
}

std::uint64_t Rng::poisson(double mean) {
  if (mean < 0.0 || !std::isfinite(mean)) {
    throw std::invalid_argument("poisson mean must be finite and non-negative");
  }
  if (mean == 0.0) {
    return 0;
  }
  // Split large means into chunks of bounded mean and sum the draws; the
  // sum of independent Poisson variables is Poisson with the summed mean,
  // so this is exact while keeping the per-chunk inversion loop short.
  constexpr double kChunkMean = 32.0;
  std::uint64_t total = 0;
  double remaining = mean;
  while (remaining > 0.0) {
    const double chunk = remaining > kChunkMean ? kChunkMean : remaining;
    remaining -= chunk;
    // Inversion by sequential search.
    const double limit = std::exp(-chunk);
    double product = uniform();
    std::uint64_t count = 0;
    while (product > limit) {
      ++count;
      product *= uniform();
    }
    total += count;
  }
  return total;
}

}  // namespace timebin
