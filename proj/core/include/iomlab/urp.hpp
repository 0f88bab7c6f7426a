#pragma once

// URP-IoM: m groups of p seeded partial permutations from S_{n,k}; the
// template records, per group, the index of the largest Hadamard product of
// the permuted windows.

#include <cstdint>
#include <span>
#include <vector>

#include "iomlab/core.hpp"

namespace iomlab {

class UrpSecret {
 public:
  /// `flat` holds m*p permutations of k entries each (1-based), ordered by
  /// group i, then factor j.
  UrpSecret(SchemeParams params, std::vector<std::uint32_t> flat,
            std::uint64_t seed = 0);

  const SchemeParams& params() const noexcept { return params_; }
  std::uint64_t seed() const noexcept { return seed_; }

  /// Partial permutation P_{i,j} (0-based i < m, j < p), entries in [1, n].
  std::span<const std::uint32_t> permutation(std::size_t i, std::size_t j) const;

  bool operator==(const UrpSecret&) const = default;

 private:
  SchemeParams params_;
  std::vector<std::uint32_t> flat_;
  std::uint64_t seed_ = 0;
};

/// Samples each P_{i,j} with a partial Fisher-Yates shuffle of (1..n) using
/// Rng(seed): for l = 0..k-1 swap slot l with slot l + below(n - l). The pool
/// is reset to the identity before every permutation; order is i, then j.
UrpSecret urp_gen_secret(std::uint64_t seed, const SchemeParams& params);

Template urp_transform(const UrpSecret& secret, std::span<const double> x);

}  // namespace iomlab
