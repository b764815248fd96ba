#pragma once

#include <cstdint>
#include <random>

namespace mwlab {

/// Deterministic random stream used everywhere corpora are generated.
///
/// The raw 64-bit source is std::mt19937_64, whose output sequence is pinned
/// by the C++ standard, so identical seeds give identical streams on every
/// platform. The value transforms below are fixed here (not delegated to
/// std::uniform_real_distribution etc., which may differ between standard
/// libraries):
///   uniform01: (u64 >> 11) * 2^-53
///   normal:    Box-Muller on two uniform01 draws, both outputs consumed
///   uniform_int: rejection sampling on the high bits
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller; the spare value is cached.
  double normal();

  /// Uniform integer in [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Derives an independent per-stream seed from a base seed (splitmix64 mix).
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace mwlab
