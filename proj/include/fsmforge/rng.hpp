// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

namespace fsmforge {

/// Deterministic 64-bit PRNG: xoshiro256** seeded through splitmix64.
/// Both algorithms are fixed published generators, so a (seed, draw order)
/// pair reproduces bit-identically across platforms and compilers.
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t x = seed;
    for (auto& w : s_) w = splitmix64(x);
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform in [0, n) via the multiply-shift reduction; one draw per call.
  uint64_t bounded(uint64_t n) {
    return static_cast<uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Uniform in [lo, hi], inclusive.
  int range(int lo, int hi) {
    return lo + static_cast<int>(bounded(static_cast<uint64_t>(hi - lo) + 1));
  }

  /// Always consumes exactly one draw, so skipped events keep the stream aligned.
  bool bernoulli(double p) {
    const uint64_t draw = next_u64();
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return draw < static_cast<uint64_t>(p * 18446744073709551616.0);
  }

 private:
  static uint64_t splitmix64(uint64_t& x) {
    uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  static uint64_t rotl(uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

  uint64_t s_[4];
};

}  // namespace fsmforge
