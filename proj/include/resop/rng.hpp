#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "resop/error.hpp"

namespace resop {

// xoshiro256** (Blackman & Vigna, 2018) seeded through splitmix64.
// Chosen over std::mt19937 because the standard-library distributions are not
// bit-portable across implementations; every stochastic run in this project
// records its seed and must replay bit-exactly.
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t z = seed;
    for (auto& word : state_) word = splitmix64(z);
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n). Multiply-shift with rejection (Lemire, 2019).
  uint64_t next_below(uint64_t n) {
    if (n == 0) throw ContractError("Rng::next_below: n must be positive");
    __uint128_t m = static_cast<__uint128_t>(next_u64()) * n;
    auto lo = static_cast<uint64_t>(m);
    if (lo < n) {
      const uint64_t threshold = (0 - n) % n;
      while (lo < threshold) {
        m = static_cast<__uint128_t>(next_u64()) * n;
        lo = static_cast<uint64_t>(m);
      }
    }
    return static_cast<uint64_t>(m >> 64);
  }

  int uniform_index(int n) { return static_cast<int>(next_below(static_cast<uint64_t>(n))); }

  // Index sampled from an (already validated) probability vector.
  int sample_categorical(std::span<const double> probs) {
    const double u = uniform01();
    double cum = 0.0;
    for (size_t k = 0; k < probs.size(); ++k) {
      cum += probs[k];
      if (u < cum) return static_cast<int>(k);
    }
    return static_cast<int>(probs.size()) - 1;
  }

  // Derives an independent deterministic stream; used to give each episode,
  // subproblem, or sample its own generator regardless of execution order.
  static uint64_t derive_seed(uint64_t base, uint64_t stream) {
    uint64_t z = base ^ (0x9e3779b97f4a7c15ULL + stream * 0xbf58476d1ce4e5b9ULL);
    z = splitmix64(z);
    return splitmix64(z);
  }

  static uint64_t derive_seed(uint64_t base, uint64_t a, uint64_t b) {
    return derive_seed(derive_seed(base, a), b);
  }

  static uint64_t derive_seed(uint64_t base, uint64_t a, uint64_t b, uint64_t c) {
    return derive_seed(derive_seed(base, a, b), c);
  }

 private:
  static uint64_t splitmix64(uint64_t& x) {
    uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  uint64_t state_[4];
};

}  // namespace resop
