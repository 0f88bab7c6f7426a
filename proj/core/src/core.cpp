#include "iomlab/core.hpp"

#include <cmath>
#include <string>

#include "iomlab/error.hpp"

namespace iomlab {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::Unsupported: return "Unsupported";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::DimensionError: return "DimensionError";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

void SchemeParams::validate() const {
  require(n >= 1, ErrorKind::InvalidInput, "scheme params: n must be positive");
  require(k >= 1 && k <= n, ErrorKind::InvalidInput,
          "scheme params: k must satisfy 1 <= k <= n");
  require(m >= 1, ErrorKind::InvalidInput, "scheme params: m must be positive");
  require(p >= 1, ErrorKind::InvalidInput, "scheme params: p must be positive");
  require(tau >= 0.0 && tau <= 1.0, ErrorKind::InvalidInput,
          "scheme params: tau must lie in [0, 1]");
}

FeatureVector::FeatureVector(std::vector<double> values)
    : values_(std::move(values)) {
  require(!values_.empty(), ErrorKind::InvalidInput, "feature vector is empty");
  for (double v : values_) {
    require(std::isfinite(v), ErrorKind::InvalidInput,
            "feature vector has a non-finite entry");
  }
}

Template::Template(std::vector<std::uint32_t> indices, std::size_t k)
    : indices_(std::move(indices)), k_(k) {
  require(!indices_.empty(), ErrorKind::InvalidInput, "template is empty");
  for (auto i : indices_) {
    require(i >= 1 && i <= k_, ErrorKind::InvalidInput,
            "template entry outside [1, k]");
  }
}

void FeatureThresholds::validate() const {
  require(tau_euc >= 0.0, ErrorKind::InvalidInput, "tau_euc must be >= 0");
  require(tau_sim <= 0.5, ErrorKind::InvalidInput, "tau_sim must be <= 0.5");
}

std::size_t iom(std::span<const double> v) {
  require(!v.empty(), ErrorKind::InvalidInput, "iom of an empty vector");
  std::size_t best = 0;
  for (std::size_t j = 1; j < v.size(); ++j) {
    if (v[j] > v[best]) best = j;
  }
  return best + 1;
}

std::size_t hamming_distance(const Template& u, const Template& w) {
  require(u.size() == w.size(), ErrorKind::InvalidInput,
          "hamming distance: template lengths differ");
  std::size_t d = 0;
  for (std::size_t i = 0; i < u.size(); ++i) d += (u[i] != w[i]);
  return d;
}

double comparison_score(const Template& u, const Template& w) {
  const auto d = hamming_distance(u, w);
  return 1.0 - static_cast<double>(d) / static_cast<double>(u.size());
}

bool verify_template(const Template& u, const Template& w, double tau) {
  require(tau >= 0.0 && tau <= 1.0, ErrorKind::InvalidInput,
          "verify: tau must lie in [0, 1]");
  const auto d = hamming_distance(u, w);
  return static_cast<double>(d) / static_cast<double>(u.size()) <= 1.0 - tau;
}

namespace {
void require_same_length(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), ErrorKind::InvalidInput,
          "vectors have different lengths");
}
}  // namespace

double euclidean_distance(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y);
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

double similarity_score(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y);
  double dot = 0.0;
  double energy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += x[i] * y[i];
    energy += x[i] * x[i] + y[i] * y[i];
  }
  require(energy > 0.0, ErrorKind::DegenerateInput,
          "similarity score: both vectors are zero");
  return dot / energy;
}

bool verify_feature(std::span<const double> x, std::span<const double> y,
                    const FeatureThresholds& thresholds, FeatureMetric metric) {
  switch (metric) {
    case FeatureMetric::Euclidean:
      return euclidean_distance(x, y) <= thresholds.tau_euc;
    case FeatureMetric::Similarity:
      return similarity_score(x, y) >= thresholds.tau_sim;
  }
  fail(ErrorKind::InvalidInput, "unknown feature metric");
}

}  // namespace iomlab
