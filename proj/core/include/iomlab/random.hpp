#pragma once

#include <cstdint>
#include <random>

namespace iomlab {

/// Stream identifiers mixed into a master seed. The numeric values are part of
/// the reproducibility contract: changing them changes every derived secret.
enum class Stream : std::uint64_t {
  Corpus = 1,
  Enrollment = 2,
  Pairs = 3,
  Holdout = 4,
  Baseline = 5,
  Link = 6,
};

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Derives an independent 64-bit seed for (stream, a, b) from a master seed:
///   h0 = splitmix64(master)
///   h1 = splitmix64(h0 ^ stream)
///   h2 = splitmix64(h1 ^ a)
///   h3 = splitmix64(h2 ^ b)
/// `a` and `b` are counters such as (user index, enrollment index).
constexpr std::uint64_t derive_seed(std::uint64_t master, Stream stream,
                                    std::uint64_t a = 0,
                                    std::uint64_t b = 0) noexcept {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
  h = splitmix64(h ^ a);
  return splitmix64(h ^ b);
}

/// Deterministic generator used everywhere randomness is needed.
///
/// Engine: std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The library distributions (std::normal_distribution and
/// friends) are implementation-defined, so sampling is done here:
///   uniform01   -> top 53 bits of one draw, scaled by 2^-53, in [0, 1)
///   below(n)    -> rejection sampling on one draw per attempt, unbiased
///   gaussian    -> Box-Muller on two uniform01 draws; both outputs are
///                  used, cosine branch first
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  double gaussian();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace iomlab
