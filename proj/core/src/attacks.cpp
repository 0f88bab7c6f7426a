#include "iomlab/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "iomlab/error.hpp"

namespace iomlab {

template <class Secret>
Leak<Secret>::Leak(std::shared_ptr<const Secret> s, Template t)
    : secret(std::move(s)), tmpl(std::move(t)) {
  require(secret != nullptr, ErrorKind::InvalidInput, "leak without a secret");
  require(tmpl.size() == secret->params().m, ErrorKind::InvalidInput,
          "leak template length differs from m");
  for (auto e : tmpl.indices()) {
    require(e >= 1 && e <= secret->params().k, ErrorKind::InvalidInput,
            "leak template entry outside [1, k]");
  }
}

template struct Leak<GrpSecret>;
template struct Leak<UrpSecret>;

namespace {

// Accumulates dense rows before they are copied into one matrix.
class RowBuffer {
 public:
  explicit RowBuffer(std::size_t cols) : cols_(cols) {}

  double* add_row(double rhs) {
    coeffs_.resize(coeffs_.size() + cols_, 0.0);
    rhs_.push_back(rhs);
    return coeffs_.data() + coeffs_.size() - cols_;
  }

  std::size_t rows() const { return rhs_.size(); }

  opt::ConstraintSystem finish(double lo, double hi) const {
    opt::ConstraintSystem system;
    const auto r = static_cast<Eigen::Index>(rows());
    const auto d = static_cast<Eigen::Index>(cols_);
    system.a = Eigen::Map<const opt::Matrix>(coeffs_.data(), r, d);
    system.b = Eigen::Map<const opt::Vector>(rhs_.data(), r);
    system.lower = opt::Vector::Constant(d, lo);
    system.upper = opt::Vector::Constant(d, hi);
    return system;
  }

 private:
  std::size_t cols_;
  std::vector<double> coeffs_;
  std::vector<double> rhs_;
};

double row_rhs(std::size_t j, std::size_t winner, double margin, MarginMode mode) {
  if (mode == MarginMode::Symmetric || j < winner) return -margin;
  return 0.0;
}

void add_grp_window(RowBuffer& buffer, const GrpLeak& leak, std::size_t window,
                    double margin, MarginMode mode) {
  const auto& w = leak.secret->projection(window);
  const std::size_t n = leak.secret->params().n;
  const std::size_t winner = leak.tmpl[window];  // 1-based
  for (std::size_t j = 1; j <= leak.secret->params().k; ++j) {
    if (j == winner) continue;
    double* row = buffer.add_row(row_rhs(j, winner, margin, mode));
    const auto cj = static_cast<Eigen::Index>(j - 1);
    const auto cu = static_cast<Eigen::Index>(winner - 1);
    for (std::size_t r = 0; r < n; ++r) {
      const auto rr = static_cast<Eigen::Index>(r);
      row[r] = w(rr, cj) - w(rr, cu);
    }
  }
}

std::size_t common_dimension(std::span<const GrpLeak> leaks) {
  require(!leaks.empty(), ErrorKind::InvalidInput, "no leaks supplied");
  const std::size_t n = leaks.front().secret->params().n;
  for (const auto& leak : leaks) {
    require(leak.secret->params().n == n, ErrorKind::InvalidInput,
            "leaks disagree on the feature length n");
  }
  return n;
}

Preimage wrap(opt::SolveResult result, Preimage::Kind kind) {
  if (!result.ok()) {
    const auto kind_of_error = result.status == opt::SolveStatus::Infeasible
                                   ? ErrorKind::Infeasible
                                   : ErrorKind::NumericalFailure;
    fail(kind_of_error, "preimage solve failed: " + result.diagnostics.message);
  }
  Preimage out;
  out.values.assign(result.y.data(), result.y.data() + result.y.size());
  out.kind = kind;
  out.provenance = std::move(result.diagnostics);
  return out;
}

}  // namespace

opt::ConstraintSystem grp_build_constraints(std::span<const GrpLeak> leaks,
                                            double margin, MarginMode mode,
                                            double bound) {
  require(margin >= 0.0, ErrorKind::InvalidInput, "margin must be >= 0");
  const std::size_t n = common_dimension(leaks);
  RowBuffer buffer(n);
  for (const auto& leak : leaks) {
    for (std::size_t i = 0; i < leak.secret->params().m; ++i) {
      add_grp_window(buffer, leak, i, margin, mode);
    }
  }
  return buffer.finish(-bound, bound);
}

Preimage grp_preimage(const opt::ConstraintSystem& system,
                      const opt::Objective& objective,
                      const opt::SolverSettings& settings) {
  const auto kind = objective.kind == opt::Objective::Kind::None
                        ? Preimage::Kind::NearbyTemplate
                        : Preimage::Kind::NearbyFeature;
  return wrap(opt::solve(system, objective, settings), kind);
}

RefineResult grp_sc_refine(std::span<const GrpLeak> leaks, double margin,
                           MarginMode mode, const opt::SolverSettings& settings) {
  require(leaks.size() >= 2, ErrorKind::InvalidInput,
          "selective refinement needs at least two leaks");
  const std::size_t n = common_dimension(leaks);
  RowBuffer buffer(n);
  RefineResult out;

  const auto& first = leaks.front();
  for (std::size_t i = 0; i < first.secret->params().m; ++i) {
    add_grp_window(buffer, first, i, margin, mode);
  }
  out.added_windows.push_back(first.secret->params().m);
  out.preimage = grp_preimage(buffer.finish(-kGrpBound, kGrpBound),
                              opt::Objective::none(), settings);
  out.row_counts.push_back(buffer.rows());

  for (std::size_t b = 1; b < leaks.size(); ++b) {
    const auto& leak = leaks[b];
    const Template predicted = grp_transform(*leak.secret, out.preimage.values);
    std::size_t added = 0;
    for (std::size_t i = 0; i < leak.tmpl.size(); ++i) {
      if (predicted[i] == leak.tmpl[i]) continue;
      add_grp_window(buffer, leak, i, margin, mode);
      ++added;
    }
    out.added_windows.push_back(added);
    if (added > 0) {
      out.preimage = grp_preimage(buffer.finish(-kGrpBound, kGrpBound),
                                  opt::Objective::none(), settings);
    }
    out.row_counts.push_back(buffer.rows());
  }
  return out;
}

LongLivedScore grp_long_lived(const Preimage& preimage, const GrpSecret& new_secret,
                              const Template& new_template, double tau) {
  const Template presented = grp_transform(new_secret, preimage.values);
  return {comparison_score(presented, new_template),
          verify_template(presented, new_template, tau)};
}

double sign_guess_bits(double range_count, std::size_t n, double sign_accuracy) {
  require(range_count >= 2.0, ErrorKind::InvalidInput, "range_count must be >= 2");
  require(n >= 1, ErrorKind::InvalidInput, "n must be >= 1");
  require(sign_accuracy > 0.0 && sign_accuracy <= 1.0, ErrorKind::InvalidInput,
          "sign accuracy must lie in (0, 1]");
  return static_cast<double>(n) *
         (std::log2(range_count / 2.0) - std::log2(sign_accuracy));
}

double sign_guess_baseline_bits(double range_count, std::size_t n) {
  require(range_count >= 2.0, ErrorKind::InvalidInput, "range_count must be >= 2");
  return static_cast<double>(n) * std::log2(range_count);
}

double component_range_count(double lo, double hi, double resolution) {
  require(hi > lo && resolution > 0.0, ErrorKind::InvalidInput,
          "component range: need hi > lo and resolution > 0");
  return std::round((hi - lo) / resolution);
}

opt::ConstraintSystem urp_build_constraints(std::span<const UrpLeak> leaks,
                                            double margin,
                                            std::pair<double, double> log_bounds,
                                            MarginMode mode) {
  require(!leaks.empty(), ErrorKind::InvalidInput, "no leaks supplied");
  require(margin >= 0.0, ErrorKind::InvalidInput, "margin must be >= 0");
  require(log_bounds.first < log_bounds.second, ErrorKind::InvalidInput,
          "log bounds must satisfy lo < hi");
  const std::size_t n = leaks.front().secret->params().n;
  for (const auto& leak : leaks) {
    const auto& params = leak.secret->params();
    if (params.p != 2) {
      fail(ErrorKind::Unsupported,
           "urp constraints are only defined for p = 2, got p = " + std::to_string(params.p));
    }
    require(params.n == n, ErrorKind::InvalidInput,
            "leaks disagree on the feature length n");
  }

  RowBuffer buffer(n);
  for (const auto& leak : leaks) {
    const auto& params = leak.secret->params();
    for (std::size_t i = 0; i < params.m; ++i) {
      const auto first = leak.secret->permutation(i, 0);
      const auto second = leak.secret->permutation(i, 1);
      const std::size_t winner = leak.tmpl[i];
      const std::size_t w = winner - 1;
      for (std::size_t j = 1; j <= params.k; ++j) {
        if (j == winner) continue;
        double* row = buffer.add_row(row_rhs(j, winner, margin, mode));
        row[first[j - 1] - 1] += 1.0;
        row[second[j - 1] - 1] += 1.0;
        row[first[w] - 1] -= 1.0;
        row[second[w] - 1] -= 1.0;
      }
    }
  }
  return buffer.finish(log_bounds.first, log_bounds.second);
}

Preimage urp_preimage(const opt::ConstraintSystem& system,
                      const opt::SolverSettings& settings) {
  Preimage out = wrap(opt::solve(system, opt::Objective::none(), settings),
                      Preimage::Kind::NearbyTemplate);
  for (double& v : out.values) v = std::exp(v);
  return out;
}

LongLivedScore urp_long_lived(const Preimage& preimage, const UrpSecret& new_secret,
                              const Template& new_template, double tau) {
  const Template presented = urp_transform(new_secret, preimage.values);
  return {comparison_score(presented, new_template),
          verify_template(presented, new_template, tau)};
}

std::size_t beta_sign_agreement(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), ErrorKind::InvalidInput,
          "sign agreement: vectors have different lengths");
  std::size_t count = 0;
  for (std::size_t i = 0; i < x.size(); ++i) count += (x[i] * y[i] >= 0.0);
  return count;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), ErrorKind::InvalidInput,
          "pearson: vectors have different lengths");
  require(x.size() >= 2, ErrorKind::InvalidInput, "pearson: need at least two entries");
  const double n = static_cast<double>(x.size());
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mean_x += x[i];
    mean_y += y[i];
  }
  mean_x /= n;
  mean_y /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mean_x;
    const double dy = y[i] - mean_y;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  require(sxx > 0.0 && syy > 0.0, ErrorKind::DegenerateInput,
          "pearson: constant vector");
  return std::clamp(sxy / (std::sqrt(sxx) * std::sqrt(syy)), -1.0, 1.0);
}

double link_statistic(std::span<const double> x, std::span<const double> y,
                      const LinkMetric& metric) {
  switch (metric.kind) {
    case LinkMetric::Kind::Beta:
      return static_cast<double>(beta_sign_agreement(x, y));
    case LinkMetric::Kind::Pearson:
      return std::abs(pearson(x, y));
  }
  fail(ErrorKind::InvalidInput, "unknown link metric");
}

int link_decide(std::span<const double> x, std::span<const double> y,
                const LinkMetric& metric) {
  return link_statistic(x, y, metric) >= metric.threshold ? 1 : 0;
}

}  // namespace iomlab
