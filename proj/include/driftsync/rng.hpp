#pragma once

#include <cstdint>
#include <cmath>

namespace driftsync {

// SplitMix64 mixer. Counter-based keying keeps example generation a pure
// function of (seed, learner, round); no generator state is shared.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t mix_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = splitmix64(seed ^ 0x6a09e667f3bcc908ULL);
  h = splitmix64(h ^ (a * 0xff51afd7ed558ccdULL));
  h = splitmix64(h ^ (b * 0xc4ceb9fe1a85ec53ULL));
  return h;
}

/**
 * Deterministic generator used everywhere randomness is needed.
 * The draw sequence is part of the stream contract: normal() always
 * consumes exactly two raw draws, unit() exactly one.
 */
class Rng {
 public:
  explicit Rng(std::uint64_t key) : state_(splitmix64(key)) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t x = state_;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  // uniform in [0,1), 53-bit resolution
  double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  // standard normal via Box-Muller; two raw draws, no cached spare
  double normal() {
    double u1 = 1.0 - unit();  // (0,1], keeps the log finite
    double u2 = unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

 private:
  std::uint64_t state_;
};

}  // namespace driftsync
