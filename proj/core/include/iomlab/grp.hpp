#pragma once

// GRP-IoM: m seeded Gaussian n-by-k projections; the template records, per
// projection, the index of the largest projected coordinate.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "iomlab/core.hpp"

namespace iomlab {

class GrpSecret {
 public:
  /// Column j of projection(i) is W_{i,j}, a length-n standard Gaussian draw.
  GrpSecret(SchemeParams params, std::vector<Eigen::MatrixXd> projections,
            std::uint64_t seed = 0);

  const SchemeParams& params() const noexcept { return params_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t size() const noexcept { return projections_.size(); }
  const Eigen::MatrixXd& projection(std::size_t i) const { return projections_[i]; }

  bool operator==(const GrpSecret& other) const;

 private:
  SchemeParams params_;
  std::vector<Eigen::MatrixXd> projections_;
  std::uint64_t seed_ = 0;
};

/// Draws the m projections from Rng(seed). Order: matrices by index, columns
/// by index, entries by row.
GrpSecret grp_gen_secret(std::uint64_t seed, const SchemeParams& params);

Template grp_transform(const GrpSecret& secret, std::span<const double> x);

}  // namespace iomlab
