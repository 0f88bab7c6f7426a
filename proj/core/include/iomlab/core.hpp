#pragma once

// Domain types shared by both IoM schemes, the index-of-max primitive, and
// the template and feature-space verifiers.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace iomlab {

/// Scheme configuration. `p` is only meaningful for URP-IoM.
struct SchemeParams {
  std::size_t n = 299;
  std::size_t k = 16;
  std::size_t m = 300;
  std::size_t p = 1;
  double tau = 0.06;

  /// Throws InvalidInput unless 1 <= k <= n, m >= 1, p >= 1, 0 <= tau <= 1.
  void validate() const;

  bool operator==(const SchemeParams&) const = default;
};

/// Pre-transform biometric representation: non-empty, all entries finite.
class FeatureVector {
 public:
  FeatureVector() = default;
  explicit FeatureVector(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  operator std::span<const double>() const noexcept { return values_; }

  bool operator==(const FeatureVector&) const = default;

 private:
  std::vector<double> values_;
};

/// IoM template: m indices, each in [1, k] (1-based, as published).
class Template {
 public:
  Template() = default;
  Template(std::vector<std::uint32_t> indices, std::size_t k);

  std::size_t size() const noexcept { return indices_.size(); }
  std::size_t k() const noexcept { return k_; }
  std::uint32_t operator[](std::size_t i) const { return indices_[i]; }
  std::span<const std::uint32_t> indices() const noexcept { return indices_; }

  bool operator==(const Template&) const = default;

 private:
  std::vector<std::uint32_t> indices_;
  std::size_t k_ = 0;
};

struct FeatureThresholds {
  double tau_euc = 0.33;
  double tau_sim = 0.13;

  void validate() const;
};

enum class FeatureMetric { Euclidean, Similarity };

/// Smallest 1-based index at which `v` attains its maximum. Exact comparison.
std::size_t iom(std::span<const double> v);

std::size_t hamming_distance(const Template& u, const Template& w);

/// 1 - D_H(u, w) / m: the fraction of positions with the same entry.
double comparison_score(const Template& u, const Template& w);

/// True iff D_H(u, w) / m <= 1 - tau.
bool verify_template(const Template& u, const Template& w, double tau);

double euclidean_distance(std::span<const double> x, std::span<const double> y);

/// s = sum x_i y_i / sum (x_i^2 + y_i^2); at most 1/2, reached at x == y.
/// Throws DegenerateInput when both vectors are zero.
double similarity_score(std::span<const double> x, std::span<const double> y);

bool verify_feature(std::span<const double> x, std::span<const double> y,
                    const FeatureThresholds& thresholds, FeatureMetric metric);

}  // namespace iomlab
