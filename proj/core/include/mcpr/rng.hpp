#pragma once

#include <cstdint>

namespace mcpr {

// Splittable stream RNG used everywhere randomness is needed.
//
// Core generator is xoshiro256++ seeded through splitmix64, so a stream is a
// pure function of (seed, fork path). Forking derives an independent child
// stream without touching the parent, which is what makes per-user sampling
// and per-trial experiments reproducible under any parallel schedule.
//
// The standard <random> distributions are deliberately not used: their output
// is implementation-defined, and experiment CSVs must be byte-stable.
class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& w : state_) w = splitmix64(x);
  }

  SplitRng fork(std::uint64_t tag) const {
    std::uint64_t x = state_[0] ^ mix(state_[1], tag);
    return SplitRng(splitmix64(x));
  }
  SplitRng fork(std::uint64_t a, std::uint64_t b) const { return fork(mix(a, b)); }
  SplitRng fork(std::uint64_t a, std::uint64_t b, std::uint64_t c) const {
    return fork(mix(mix(a, b), c));
  }

  std::uint64_t next_u64() {
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

  // Uniform on [0, 1), 53 random mantissa bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), n >= 1. Rejection-free modulo bias is
  // negligible for the n used here (n << 2^32), but use Lemire reduction
  // anyway since it is a one-liner.
  std::uint64_t uniform_index(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

 private:
  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
    return splitmix64(x);
  }
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
};

// Fork tags for the top-level stages, so that independent parts of a run
// never share a stream.
namespace stream {
inline constexpr std::uint64_t kScores = 0x5c01;
inline constexpr std::uint64_t kComparisons = 0x5c02;
inline constexpr std::uint64_t kSplit = 0x5c03;
inline constexpr std::uint64_t kClusterInit = 0x5c04;
inline constexpr std::uint64_t kTrial = 0x5c05;
inline constexpr std::uint64_t kSvd = 0x5c06;
}  // namespace stream

}  // namespace mcpr
