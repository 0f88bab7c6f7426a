#include <gtest/gtest.h>

#include <cmath>

#include "iomlab/error.hpp"
#include "iomlab/eval.hpp"
#include "testing.hpp"

using namespace iomlab;
using iomlab::testing::Gen;

namespace {

Corpus small_corpus(std::uint64_t seed, std::size_t users, std::size_t samples, std::size_t n,
                    double noise = 0.02) {
  return synth_corpus({seed, users, samples, n, kFeatureRange, noise});
}

ExperimentConfig small_config(ExperimentKind kind) {
  ExperimentConfig cfg;
  cfg.kind = kind;
  cfg.params = {30, 4, 20, 1, 0.06};
  cfg.seed = 11;
  return cfg;
}

}  // namespace

TEST(Eer, PerfectlySeparated) {
  const ScoreDistributions d{{0.0, 0.1, 0.2}, {0.5, 0.6, 0.9}};
  EXPECT_EQ(eer(d, ScoreDirection::AcceptBelow).eer, 0.0);
  const ScoreDistributions s{{0.9, 0.8}, {0.1, 0.2, 0.3}};
  EXPECT_EQ(eer(s, ScoreDirection::AcceptAbove).eer, 0.0);
}

TEST(Eer, IdenticalDistributions) {
  Gen g(80);
  for (int c = 0; c < 50; ++c) {
    auto v = g.vec(g.index(1, 200), 0.0, 1.0);
    const ScoreDistributions d{v, v};
    EXPECT_NEAR(eer(d, ScoreDirection::AcceptBelow).eer, 0.5, 1e-12);
    EXPECT_NEAR(eer(d, ScoreDirection::AcceptAbove).eer, 0.5, 1e-12);
  }
}

TEST(Eer, InterpolatesBetweenThresholds) {
  // Below 0.5 accepts genuine {0.2} and impostor none; rates cross between
  // 0.2 and 0.4.
  const ScoreDistributions d{{0.2, 0.6}, {0.4, 0.8}};
  const auto r = eer(d, ScoreDirection::AcceptBelow);
  EXPECT_NEAR(r.eer, 0.5, 1e-12);
  EXPECT_GE(r.tau_star, 0.2);
  EXPECT_LE(r.tau_star, 0.6);
}

TEST(Eer, EmptyRejected) {
  EXPECT_THROW(eer({{}, {0.1}}, ScoreDirection::AcceptBelow), Error);
  EXPECT_THROW(rates_at_threshold({{0.1}, {}}, 0.5, ScoreDirection::AcceptBelow), Error);
}

TEST(Rates, AtThreshold) {
  const ScoreDistributions d{{0.1, 0.2, 0.5, 0.9}, {0.3, 0.6, 0.7, 0.8}};
  auto r = rates_at_threshold(d, 0.5, ScoreDirection::AcceptBelow);
  EXPECT_DOUBLE_EQ(r.fnmr, 0.25);
  EXPECT_DOUBLE_EQ(r.fmr, 0.25);
  r = rates_at_threshold(d, 0.6, ScoreDirection::AcceptAbove);
  EXPECT_DOUBLE_EQ(r.fnmr, 0.75);
  EXPECT_DOUBLE_EQ(r.fmr, 0.75);
}

TEST(ScoreDistributions, IdenticalSamplesGiveZeroGenuineDistance) {
  const auto c = synth_corpus({3, 2, 2, 10, kFeatureRange, 0.0});
  const auto d = score_distributions(c, PairMetric::euclidean());
  ASSERT_EQ(d.genuine.size(), 2u);
  ASSERT_EQ(d.impostor.size(), 4u);
  for (double v : d.genuine) EXPECT_EQ(v, 0.0);
  for (double v : d.impostor) EXPECT_GT(v, 0.0);
}

TEST(ScoreDistributions, PairCounts) {
  const auto c = small_corpus(4, 5, 3, 12);
  for (const auto metric : {PairMetric::euclidean(), PairMetric::similarity(),
                            PairMetric::template_rate(Scheme::Grp, {12, 4, 30, 1, 0.06}, 9)}) {
    const auto d = score_distributions(c, metric);
    EXPECT_EQ(d.genuine.size(), 5u * 3u);
    EXPECT_EQ(d.impostor.size(), 10u * 9u);
  }
  EXPECT_EQ(direction_of(PairMetric::Kind::Euclidean), ScoreDirection::AcceptBelow);
  EXPECT_EQ(direction_of(PairMetric::Kind::Similarity), ScoreDirection::AcceptAbove);
}

TEST(ScoreDistributions, NeedsTwoUsers) {
  const auto c = small_corpus(4, 1, 3, 12);
  EXPECT_THROW(score_distributions(c, PairMetric::euclidean()), Error);
}

TEST(Config, JsonRoundTrip) {
  ExperimentConfig cfg = small_config(ExperimentKind::GrpReversibility);
  cfg.cases = {ObjectiveCase::MinNorm, ObjectiveCase::HeldOut};
  cfg.taus_euc = {0.5, 0.25};
  cfg.leaks = {1, 2};
  cfg.solver.feas_tol = 1e-9;
  cfg.margin_mode = MarginMode::Symmetric;
  cfg.link_metric = LinkMetric::pearson(0.18);
  const auto back = config_from_json(to_json(cfg));
  EXPECT_EQ(to_json(back).dump(), to_json(cfg).dump());
  EXPECT_EQ(back.cases, cfg.cases);
  EXPECT_EQ(back.params, cfg.params);
}

TEST(Config, KindNames) {
  for (auto k : {ExperimentKind::GrpAuth, ExperimentKind::GrpAuthMultiLeak, ExperimentKind::GrpLongLived,
                 ExperimentKind::GrpReversibility, ExperimentKind::UrpAuth,
                 ExperimentKind::UrpLongLived, ExperimentKind::Link}) {
    EXPECT_EQ(experiment_kind_from_string(to_string(k)), k);
  }
  EXPECT_THROW(experiment_kind_from_string("nope"), Error);
}

TEST(Config, ValidationCatchesInconsistencies) {
  auto cfg = small_config(ExperimentKind::UrpAuth);
  cfg.params.p = 3;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = small_config(ExperimentKind::Link);
  cfg.cases = {ObjectiveCase::HeldOut};
  EXPECT_THROW(cfg.validate(), Error);
  cfg = small_config(ExperimentKind::GrpAuthMultiLeak);
  cfg.strategy = LeakStrategy::SelectedConstraints;
  cfg.leaks = {1};
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(Experiment, GrpAuthIsExact) {
  const auto c = small_corpus(5, 8, 2, 30);
  const auto r = run_experiment(small_config(ExperimentKind::GrpAuth), c);
  const auto& col = r.column("N=1");
  EXPECT_EQ(col.completed, 8u);
  EXPECT_EQ(col.rates.at("rate_auth"), 1.0);
  EXPECT_EQ(col.rates.at("exact_match"), 1.0);
  EXPECT_EQ(col.stats.at("constraints").avg, 3.0 * 20.0 + 60.0);
  EXPECT_LE(col.stats.at("max_violation").max, 1e-8);
  EXPECT_NO_THROW(r.validate());
  EXPECT_TRUE(r.config.contains("derived_seeds"));
}

TEST(Experiment, UrpAuthIsExactOnPositiveFeatures) {
  const auto c = synth_corpus({6, 6, 2, 30, {0.01, 0.25}, 0.02});
  auto cfg = small_config(ExperimentKind::UrpAuth);
  cfg.params = {30, 4, 20, 2, 0.11};
  const auto r = run_experiment(cfg, c);
  EXPECT_EQ(r.column("N=1").rates.at("rate_auth"), 1.0);
}

TEST(Experiment, ReproducibleAndThreadIndependent) {
  const auto c = small_corpus(7, 6, 3, 30);
  auto cfg = small_config(ExperimentKind::GrpLongLived);
  cfg.leaks = {1, 2};
  const auto a = run_experiment(cfg, c);
  const auto b = run_experiment(cfg, c);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  cfg.threads = 3;
  const auto t = run_experiment(cfg, c);
  ASSERT_EQ(t.columns.size(), a.columns.size());
  for (std::size_t i = 0; i < a.columns.size(); ++i) {
    for (const auto& [name, s] : a.columns[i].stats) {
      EXPECT_NEAR(s.avg, t.columns[i].stats.at(name).avg, 1e-12) << name;
    }
    EXPECT_EQ(a.columns[i].rates, t.columns[i].rates);
  }
}

TEST(Experiment, ReplayFromRecordedConfig) {
  const auto c = small_corpus(8, 5, 2, 30);
  auto cfg = small_config(ExperimentKind::GrpAuth);
  cfg.seed = 1234;
  const auto a = run_experiment(cfg, c);
  const auto b = run_experiment(config_from_json(a.config), c);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
}

TEST(Experiment, LongLivedNeedsEnoughSamples) {
  const auto c = small_corpus(9, 4, 2, 30);
  auto cfg = small_config(ExperimentKind::GrpAuthMultiLeak);
  cfg.leaks = {2};
  EXPECT_THROW(run_experiment(cfg, c), Error);
}

TEST(Experiment, SelectedConstraintsColumns) {
  const auto c = small_corpus(10, 4, 3, 30);
  auto cfg = small_config(ExperimentKind::GrpAuthMultiLeak);
  cfg.leaks = {2};
  cfg.strategy = LeakStrategy::SelectedConstraints;
  const auto r = run_experiment(cfg, c);
  const auto& col = r.column("N=2");
  EXPECT_EQ(col.completed, 4u);
  EXPECT_LE(col.stats.at("constraints").max, 2.0 * 3.0 * 20.0 + 60.0);
  EXPECT_GE(col.stats.at("constraints").min, 3.0 * 20.0 + 60.0);
}

TEST(Experiment, ReversibilityCases) {
  const auto c = small_corpus(12, 6, 2, 30);
  auto cfg = small_config(ExperimentKind::GrpReversibility);
  cfg.cases = {ObjectiveCase::None, ObjectiveCase::MinNorm, ObjectiveCase::CorpusMean,
               ObjectiveCase::HeldOut};
  const auto r = run_experiment(cfg, c);
  ASSERT_EQ(r.columns.size(), 4u);
  for (const auto& col : r.columns) {
    EXPECT_EQ(col.failures, 0u) << col.label;
    const double acc = col.stats.at("sign_accuracy").avg;
    EXPECT_GT(acc, 0.0);
    EXPECT_LE(acc, 1.0);
  }
  EXPECT_EQ(r.columns[3].completed, 5u);  // held-out user excluded
  EXPECT_TRUE(r.baselines.contains("rate_rev_sim@0.13"));
}

TEST(Experiment, LinkNoiselessGenuineConverges) {
  auto cfg = small_config(ExperimentKind::Link);
  cfg.params = {60, 8, 100, 1, 0.06};
  cfg.link_metric = LinkMetric::beta(40);
  cfg.link_trials = 500;
  const auto quiet = run_experiment(cfg, small_corpus(13, 8, 3, 60, 0.0));
  const auto noisy = run_experiment(cfg, small_corpus(13, 8, 3, 60, 0.1));
  const auto& col = quiet.columns.at(0);
  EXPECT_EQ(col.rates.at("c1"), 1.0);
  EXPECT_GT(col.rates.at("rate_link"), 0.95);
  EXPECT_GE(col.rates.at("rate_link"), noisy.columns.at(0).rates.at("rate_link"));
}

TEST(Experiment, LinkWithoutUserSignalIsGuessing) {
  // Every user owns the same vector, so genuine and impostor pairs are
  // identically distributed.
  Gen g(81);
  Corpus c;
  c.n = 40;
  const FeatureVector shared(g.vec(40, -0.25, 0.21));
  for (int u = 0; u < 10; ++u) {
    c.users.push_back({"u" + std::to_string(u), {"1", "2", "3"}, {shared, shared, shared}});
  }
  auto cfg = small_config(ExperimentKind::Link);
  cfg.params = {40, 4, 20, 1, 0.06};
  cfg.link_metric = LinkMetric::beta(26);
  cfg.link_trials = 4000;
  const auto r = run_experiment(cfg, c);
  // Binomial spread at 8000 decisions is about 0.0056.
  EXPECT_NEAR(r.columns.at(0).rates.at("rate_link"), 0.5, 0.03);
}

TEST(ParallelFor, RunsEveryIndexOnce) {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, 2,
                            [](std::size_t i) {
                              if (i == 5) throw Error(ErrorKind::InvalidInput, "boom");
                            }),
               Error);
}
