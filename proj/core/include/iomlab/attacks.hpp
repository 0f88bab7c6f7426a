#pragma once

// Stolen-token attacks on GRP-IoM and URP-IoM.
//
// Authentication: every leaked (secret, template) pair pins the argmax of
// each window, which is a set of linear inequalities on the feature vector
// (GRP) or on its componentwise logarithm (URP). Any point of that polytope
// re-enrolls to the leaked template. Reversibility adds a quadratic objective
// to pull the point towards plausible features. Linkability compares the
// preimages of two templates.

#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "iomlab/core.hpp"
#include "iomlab/grp.hpp"
#include "iomlab/optimizer.hpp"
#include "iomlab/urp.hpp"

namespace iomlab {

inline constexpr double kDefaultMargin = 1e-6;
inline constexpr double kGrpBound = 1.0;
inline constexpr std::pair<double, double> kDefaultLogBounds{-10.0, 1.0};

/// How the strictness margin is applied to the argmax inequalities.
///   TieBreak:  only rows for j < u_i get "<= -margin" (an equal value at a
///              smaller index would win the argmax); rows for j > u_i are
///              "<= 0".
///   Symmetric: every row gets "<= -margin".
enum class MarginMode { TieBreak, Symmetric };

template <class Secret>
struct Leak {
  std::shared_ptr<const Secret> secret;
  Template tmpl;

  Leak(std::shared_ptr<const Secret> s, Template t);
};

using GrpLeak = Leak<GrpSecret>;
using UrpLeak = Leak<UrpSecret>;

struct Preimage {
  enum class Kind { NearbyTemplate, NearbyFeature };

  std::vector<double> values;
  Kind kind = Kind::NearbyTemplate;
  opt::SolveDiagnostics provenance;
};

// ---------------------------------------------------------------------------
// GRP

/// One row per (leak, i, j != u_i): <W_{i,j} - W_{i,u_i}, x> <= rhs, rows
/// ordered by leak, then i, then j; box [-bound, bound]^n.
opt::ConstraintSystem grp_build_constraints(std::span<const GrpLeak> leaks,
                                            double margin = kDefaultMargin,
                                            MarginMode mode = MarginMode::TieBreak,
                                            double bound = kGrpBound);

/// Solves the system and wraps the answer. Throws Infeasible or
/// NumericalFailure when the solver does not return a point.
Preimage grp_preimage(const opt::ConstraintSystem& system,
                      const opt::Objective& objective = opt::Objective::none(),
                      const opt::SolverSettings& settings = {});

struct RefineResult {
  Preimage preimage;
  std::vector<std::size_t> row_counts;  // system size after each pass
  std::vector<std::size_t> added_windows;  // windows added per pass (first = m)
};

/// Selective-constraint refinement over N >= 2 leaks: start from every
/// window of leak 1, then for each later leak add only the windows whose
/// argmax the current iterate gets wrong, re-solving after each pass.
RefineResult grp_sc_refine(std::span<const GrpLeak> leaks,
                           double margin = kDefaultMargin,
                           MarginMode mode = MarginMode::TieBreak,
                           const opt::SolverSettings& settings = {});

struct LongLivedScore {
  double score = 0.0;
  bool accepted = false;
};

/// Presents an old preimage against a renewed enrollment.
LongLivedScore grp_long_lived(const Preimage& preimage, const GrpSecret& new_secret,
                              const Template& new_template, double tau);

// ---------------------------------------------------------------------------
// Exhaustive-search estimate for exact reversal

/// Bits of work to enumerate n components of `range_count` values each when
/// the sign of every component is guessed correctly with probability
/// `sign_accuracy`: n * (log2(range_count / 2) + log2(1 / sign_accuracy)).
double sign_guess_bits(double range_count, std::size_t n, double sign_accuracy);

/// Same enumeration without sign knowledge: n * log2(range_count).
double sign_guess_baseline_bits(double range_count, std::size_t n);

/// Number of representable component values in [lo, hi] at `resolution`.
double component_range_count(double lo, double hi, double resolution);

// ---------------------------------------------------------------------------
// URP (p = 2)

/// Rows over c = log x: c_{s1(j)} + c_{s2(j)} - c_{s1(u_i)} - c_{s2(u_i)} <= rhs,
/// one per (leak, i, j != u_i); box [lo, hi] on every c. Throws Unsupported
/// unless p == 2.
opt::ConstraintSystem urp_build_constraints(
    std::span<const UrpLeak> leaks, double margin = kDefaultMargin,
    std::pair<double, double> log_bounds = kDefaultLogBounds,
    MarginMode mode = MarginMode::TieBreak);

/// Solves for c* and returns x* = exp(c*), all entries positive.
Preimage urp_preimage(const opt::ConstraintSystem& system,
                      const opt::SolverSettings& settings = {});

LongLivedScore urp_long_lived(const Preimage& preimage, const UrpSecret& new_secret,
                              const Template& new_template, double tau);

// ---------------------------------------------------------------------------
// Linkability

/// Number of components where x_i * y_i >= 0 (zero agrees with any sign).
std::size_t beta_sign_agreement(std::span<const double> x, std::span<const double> y);

/// Centered (Pearson) correlation. Throws DegenerateInput for constant input.
double pearson(std::span<const double> x, std::span<const double> y);

struct LinkMetric {
  enum class Kind { Beta, Pearson };

  Kind kind = Kind::Beta;
  double threshold = 170.0;

  static LinkMetric beta(double threshold) { return {Kind::Beta, threshold}; }
  static LinkMetric pearson(double threshold) { return {Kind::Pearson, threshold}; }
};

/// Metric value used by link_decide: beta, or |rho|.
double link_statistic(std::span<const double> x, std::span<const double> y,
                      const LinkMetric& metric);

/// 1 when the statistic reaches the threshold (same-user verdict), else 0.
int link_decide(std::span<const double> x, std::span<const double> y,
                const LinkMetric& metric);

}  // namespace iomlab
