#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace sonarmvs::rng {

// Counter-based generation: every draw is a pure function of (seed, counters),
// so parallel consumers produce identical streams regardless of scheduling.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  return splitmix64(h ^ c);
}

/// Uniform in [0, 1) with 53 random bits.
inline double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

inline double uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                      std::uint64_t c = 0) {
  return to_unit(hash(seed, a, b, c));
}

/// Standard normal via Box-Muller on two independent counters.
inline double normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const double u1 = 1.0 - uniform(seed, stream, index, 0);  // (0, 1]
  const double u2 = uniform(seed, stream, index, 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Sequential stream for non-hot paths (scene parameters, pose sampling).
class Stream {
 public:
  explicit Stream(std::uint64_t seed, std::uint64_t tag = 0) : seed_(seed), tag_(tag) {}
  double uniform01() { return rng::uniform(seed_, tag_, counter_++); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

 private:
  std::uint64_t seed_;
  std::uint64_t tag_;
  std::uint64_t counter_ = 0;
};

}  // namespace sonarmvs::rng
