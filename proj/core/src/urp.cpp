#include "iomlab/urp.hpp"

#include <cmath>
#include <numeric>

#include "iomlab/error.hpp"
#include "iomlab/random.hpp"

namespace iomlab {

UrpSecret::UrpSecret(SchemeParams params, std::vector<std::uint32_t> flat,
                     std::uint64_t seed)
    : params_(params), flat_(std::move(flat)), seed_(seed) {
  params_.validate();
  const std::size_t k = params_.k;
  require(flat_.size() == params_.m * params_.p * k, ErrorKind::InvalidInput,
          "urp secret: expected m*p*k permutation entries");
  std::vector<bool> seen(params_.n + 1);
  for (std::size_t start = 0; start < flat_.size(); start += k) {
    std::fill(seen.begin(), seen.end(), false);
    for (std::size_t l = 0; l < k; ++l) {
      const auto e = flat_[start + l];
      require(e >= 1 && e <= params_.n, ErrorKind::InvalidInput,
              "urp secret: permutation entry outside [1, n]");
      require(!seen[e], ErrorKind::InvalidInput,
              "urp secret: permutation entries are not distinct");
      seen[e] = true;
    }
  }
}

std::span<const std::uint32_t> UrpSecret::permutation(std::size_t i,
                                                      std::size_t j) const {
  const std::size_t k = params_.k;
  return std::span<const std::uint32_t>(flat_).subspan((i * params_.p + j) * k, k);
}

UrpSecret urp_gen_secret(std::uint64_t seed, const SchemeParams& params) {
  params.validate();
  Rng rng(seed);
  const std::size_t n = params.n;
  const std::size_t k = params.k;
  std::vector<std::uint32_t> flat;
  flat.reserve(params.m * params.p * k);
  std::vector<std::uint32_t> pool(n);
  for (std::size_t g = 0; g < params.m * params.p; ++g) {
    std::iota(pool.begin(), pool.end(), 1U);
    for (std::size_t l = 0; l < k; ++l) {
      const auto r = l + static_cast<std::size_t>(rng.below(n - l));
      std::swap(pool[l], pool[r]);
    }
    flat.insert(flat.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
  }
  return UrpSecret(params, std::move(flat), seed);
}

Template urp_transform(const UrpSecret& secret, std::span<const double> x) {
  const auto& params = secret.params();
  require(x.size() == params.n, ErrorKind::InvalidInput,
          "urp transform: feature length differs from n");
  for (double v : x) {
    require(std::isfinite(v), ErrorKind::InvalidInput,
            "urp transform: non-finite feature");
  }
  std::vector<std::uint32_t> indices(params.m);
  std::vector<double> window(params.k);
  for (std::size_t i = 0; i < params.m; ++i) {
    std::fill(window.begin(), window.end(), 1.0);
    for (std::size_t j = 0; j < params.p; ++j) {
      const auto perm = secret.permutation(i, j);
      for (std::size_t l = 0; l < params.k; ++l) window[l] *= x[perm[l] - 1];
    }
    indices[i] = static_cast<std::uint32_t>(iom(window));
  }
  return Template(std::move(indices), params.k);
}

}  // namespace iomlab
