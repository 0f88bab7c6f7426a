#pragma once

// Matcher statistics (FMR, FNMR, EER) and the experiment runners that
// measure the attacks on a corpus.
//
// Enrollment e (1-based) of user u uses sample e-1 of that user, in corpus
// order, and the secret seeded with derive_seed(seed, Stream::Enrollment,
// u, e + 1000 * trial). Every other random choice draws from its own
// derived stream, so one master seed reproduces a whole report.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "iomlab/attacks.hpp"
#include "iomlab/core.hpp"
#include "iomlab/dataset.hpp"
#include "iomlab/optimizer.hpp"
#include "iomlab/report.hpp"

namespace iomlab {

enum class Scheme { Grp, Urp };

struct PairMetric {
  enum class Kind { Euclidean, Similarity, TemplateHammingRate };

  Kind kind = Kind::Euclidean;
  Scheme scheme = Scheme::Grp;  // TemplateHammingRate only
  SchemeParams params;          // TemplateHammingRate only
  std::uint64_t seed = 0;       // TemplateHammingRate only

  static PairMetric euclidean() { return {}; }
  static PairMetric similarity() { return {Kind::Similarity, Scheme::Grp, {}, 0}; }
  static PairMetric template_rate(Scheme scheme, SchemeParams params, std::uint64_t seed) {
    return {Kind::TemplateHammingRate, scheme, params, seed};
  }
};

struct ScoreDistributions {
  std::vector<double> genuine;
  std::vector<double> impostor;
};

/// Every same-user pair and every cross-user pair of samples, scored with
/// the metric. The template metric transforms all samples with one secret
/// and scores 1 - D_H/m.
ScoreDistributions score_distributions(const Corpus& corpus, const PairMetric& metric);

enum class ScoreDirection { AcceptBelow, AcceptAbove };

ScoreDirection direction_of(PairMetric::Kind kind) noexcept;

struct Rates {
  double fmr = 0.0;
  double fnmr = 0.0;
};

/// AcceptBelow accepts score <= tau, AcceptAbove accepts score >= tau.
Rates rates_at_threshold(const ScoreDistributions& dists, double tau,
                         ScoreDirection direction);

struct EerResult {
  double eer = 0.0;
  double tau_star = 0.0;
};

/// Walks the sorted empirical thresholds and interpolates linearly between
/// the two that bracket FMR = FNMR.
EerResult eer(const ScoreDistributions& dists, ScoreDirection direction);

// ---------------------------------------------------------------------------
// Experiments

enum class ExperimentKind {
  GrpAuth,
  GrpAuthMultiLeak,
  GrpLongLived,
  GrpReversibility,
  UrpAuth,
  UrpLongLived,
  Link,
};

enum class LeakStrategy { AllConstraints, SelectedConstraints };

/// Reversibility objectives: none, min ||x||^2, min ||x - corpus mean||^2,
/// min ||x - v_r||^2 with v_r a sample of a held-out user.
enum class ObjectiveCase { None = 0, MinNorm = 1, CorpusMean = 2, HeldOut = 3 };

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::GrpAuth;
  SchemeParams params;
  std::uint64_t seed = 1;

  std::size_t max_users = 0;  // 0 = every user
  std::size_t trials_per_user = 1;

  std::vector<std::size_t> leaks{1};               // one column per N
  LeakStrategy strategy = LeakStrategy::AllConstraints;
  std::vector<ObjectiveCase> cases{ObjectiveCase::None};
  std::vector<double> taus_euc{0.33, 0.2, 0.15, 0.1};
  double tau_sim = 0.13;

  Scheme link_scheme = Scheme::Grp;
  LinkMetric link_metric;
  std::size_t link_trials = 10000;

  double margin = kDefaultMargin;
  MarginMode margin_mode = MarginMode::TieBreak;
  std::pair<double, double> log_bounds = kDefaultLogBounds;
  opt::SolverSettings solver;

  std::size_t threads = 1;

  /// Throws InvalidInput for inconsistent settings.
  void validate() const;
};

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

nlohmann::json to_json(const ExperimentConfig& config);
/// Missing keys keep their defaults. Throws ParseError on bad values.
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Per-trial solver failures are counted and skipped; rates and stats
/// cover the completed trials. Throws InsufficientData when the corpus is
/// too small for the experiment.
ExperimentReport run_experiment(const ExperimentConfig& config, const Corpus& corpus);

/// Runs body(i) for i in [0, count) on `threads` workers. Each index runs
/// exactly once; the first exception is rethrown after all workers stop.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace iomlab
