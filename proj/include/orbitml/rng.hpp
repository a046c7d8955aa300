// Counter-based pseudo-random generation.
//
// Every draw is a pure function of (seed, counter), so streams can be
// replayed, sharded by index, and reproduced across runs and thread counts.
// The u64 at counter i is the splitmix64 output for state seed + i * GAMMA
// with GAMMA = 0x9E3779B97F4A7C15 (Steele, Lea, Flood 2014).
// Normals come from Box-Muller on two consecutive u64 draws.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace orbitml {

inline constexpr std::uint64_t kRngGamma = 0x9E3779B97F4A7C15ull;

/// splitmix64 output function applied to seed + counter * GAMMA.
inline std::uint64_t rng_u64_at(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t z = seed + counter * kRngGamma;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Uniform double in (0, 1]; uses the top 53 bits.
inline double rng_unit_at(std::uint64_t seed, std::uint64_t counter) {
  return static_cast<double>((rng_u64_at(seed, counter) >> 11) + 1) * 0x1.0p-53;
}

/// Bounded draw in [0, n) by the multiply-shift reduction (bias <= n / 2^64).
inline std::uint64_t rng_below_at(std::uint64_t seed, std::uint64_t counter,
                                  std::uint64_t n) {
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(rng_u64_at(seed, counter)) * n) >> 64);
}

/// Standard normal pair from counters (c, c+1) via Box-Muller.
inline void rng_normal_pair_at(std::uint64_t seed, std::uint64_t counter,
                               double& z0, double& z1) {
  const double u1 = rng_unit_at(seed, counter);
  const double u2 = rng_unit_at(seed, counter + 1);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  z0 = r * std::cos(a);
  z1 = r * std::sin(a);
}

/// Sequential convenience wrapper over the counter functions.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t start_counter = 0)
      : seed_(seed), counter_(start_counter) {}

  std::uint64_t next_u64() { return rng_u64_at(seed_, counter_++); }
  double next_unit() { return rng_unit_at(seed_, counter_++); }
  std::uint64_t next_below(std::uint64_t n) {
    return rng_below_at(seed_, counter_++, n);
  }
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double z0, z1;
    rng_normal_pair_at(seed_, counter_, z0, z1);
    counter_ += 2;
    spare_ = z1;
    have_spare_ = true;
    return z0;
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace orbitml
