#pragma once

#include <cstdint>
#include <span>

#include "pseudogap/errors.hpp"

namespace pseudogap {

// Counter-based generator (Philox2x64-10, constants from the Random123 suite).
// State is just (seed, stream, position), so the same (seed, stream) pair
// reproduces the identical sequence on any platform and any thread schedule.
// Parallel runs give one stream per realization index.
class RealizationStream {
 public:
  explicit RealizationStream(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  std::uint64_t position() const { return position_; }

  std::uint64_t next_u64() {
    if (have_spare_) {
      have_spare_ = false;
      ++position_;
      return spare_;
    }
    std::uint64_t c0 = position_ >> 1;  // block index
    std::uint64_t c1 = stream_;
    std::uint64_t key = seed_;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t lo = mul_lo(kMul, c0);
      const std::uint64_t hi = mul_hi(kMul, c0);
      c0 = hi ^ key ^ c1;
      c1 = lo;
      key += kWeyl;
    }
    spare_ = c1;
    have_spare_ = true;
    ++position_;
    return c0;
  }

  // Uniform in [0,1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * next_double(); }

  bool bernoulli(double p) { return next_double() < p; }

  // Index drawn proportionally to `weights` (need not be normalized).
  std::size_t categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    const double u = next_double() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return i;
    }
    return weights.empty() ? throw DomainError("categorical: empty weights") : weights.size() - 1;
  }

 private:
  static std::uint64_t mul_lo(std::uint64_t a, std::uint64_t b) {
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b);
  }
  static std::uint64_t mul_hi(std::uint64_t a, std::uint64_t b) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) >> 64);
  }

  static constexpr std::uint64_t kMul = 0xD2B74407B1CE6E93ull;
  static constexpr std::uint64_t kWeyl = 0x9E3779B97F4A7C15ull;

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t position_ = 0;
  std::uint64_t spare_ = 0;
  bool have_spare_ = false;
};

}  // namespace pseudogap
