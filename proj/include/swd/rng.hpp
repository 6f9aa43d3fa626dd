#pragma once

// Platform-independent seeded randomness.
//
// The generator is xoshiro256** (Blackman & Vigna) with its 256-bit state
// expanded from the 64-bit seed by splitmix64. Uniform doubles take the top
// 53 bits of a draw, so sequences are identical on every platform and
// compiler. Bernoulli bits compare one uniform double against keep_prob.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace swd {

using BitVector = std::vector<std::uint8_t>;

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed = 0) : seed_(seed) {
    std::uint64_t sm = seed;
    for (auto& s : state_) s = splitmix64(sm);
  }

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n) by rejection, no modulo bias.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do v = next_u64();
    while (v >= limit);
    return v % n;
  }

  /// Standard normal via Box-Muller (one value per call, the pair partner is discarded).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Seed for an independent child stream; callers split streams instead of sharing one generator.
  std::uint64_t child_seed(std::uint64_t stream) const {
    std::uint64_t sm = seed_ ^ (0xD1B54A32D192ED03ull * (stream + 1));
    splitmix64(sm);
    return splitmix64(sm);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_{};
};

/// k independent bits, each 1 with probability keep_prob.
inline BitVector bernoulli_bits(SeededRng& rng, std::size_t k, double keep_prob) {
  BitVector bits(k);
  for (auto& b : bits) b = rng.uniform() < keep_prob ? 1 : 0;
  return bits;
}

}  // namespace swd
