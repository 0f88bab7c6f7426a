#include "iomlab/grp.hpp"

#include <cmath>

#include "iomlab/error.hpp"
#include "iomlab/random.hpp"

namespace iomlab {

GrpSecret::GrpSecret(SchemeParams params,
                     std::vector<Eigen::MatrixXd> projections,
                     std::uint64_t seed)
    : params_(params), projections_(std::move(projections)), seed_(seed) {
  params_.validate();
  require(projections_.size() == params_.m, ErrorKind::InvalidInput,
          "grp secret: expected m projections");
  for (const auto& w : projections_) {
    require(static_cast<std::size_t>(w.rows()) == params_.n &&
                static_cast<std::size_t>(w.cols()) == params_.k,
            ErrorKind::InvalidInput, "grp secret: projection is not n x k");
    require(w.allFinite(), ErrorKind::InvalidInput,
            "grp secret: non-finite projection entry");
  }
}

bool GrpSecret::operator==(const GrpSecret& other) const {
  if (params_ != other.params_ || seed_ != other.seed_ ||
      projections_.size() != other.projections_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < projections_.size(); ++i) {
    if (projections_[i] != other.projections_[i]) return false;
  }
  return true;
}

GrpSecret grp_gen_secret(std::uint64_t seed, const SchemeParams& params) {
  params.validate();
  Rng rng(seed);
  std::vector<Eigen::MatrixXd> projections;
  projections.reserve(params.m);
  const auto n = static_cast<Eigen::Index>(params.n);
  const auto k = static_cast<Eigen::Index>(params.k);
  for (std::size_t i = 0; i < params.m; ++i) {
    Eigen::MatrixXd w(n, k);
    for (Eigen::Index col = 0; col < k; ++col) {
      for (Eigen::Index row = 0; row < n; ++row) w(row, col) = rng.gaussian();
    }
    projections.push_back(std::move(w));
  }
  return GrpSecret(params, std::move(projections), seed);
}

Template grp_transform(const GrpSecret& secret, std::span<const double> x) {
  const auto& params = secret.params();
  require(x.size() == params.n, ErrorKind::InvalidInput,
          "grp transform: feature length differs from n");
  for (double v : x) {
    require(std::isfinite(v), ErrorKind::InvalidInput,
            "grp transform: non-finite feature");
  }
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(),
                                             static_cast<Eigen::Index>(x.size()));
  std::vector<std::uint32_t> indices(params.m);
  Eigen::VectorXd projected(static_cast<Eigen::Index>(params.k));
  for (std::size_t i = 0; i < params.m; ++i) {
    projected.noalias() = secret.projection(i).transpose() * xv;
    indices[i] = static_cast<std::uint32_t>(
        iom({projected.data(), static_cast<std::size_t>(projected.size())}));
  }
  return Template(std::move(indices), params.k);
}

}  // namespace iomlab
