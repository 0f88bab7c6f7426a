#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "iomlab/core.hpp"
#include "iomlab/error.hpp"
#include "testing.hpp"

using namespace iomlab;
using iomlab::testing::Gen;

namespace {

Template T(std::vector<std::uint32_t> v, std::size_t k) { return Template(std::move(v), k); }

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no iomlab::Error thrown";
  return ErrorKind::Io;
}

constexpr int kCases = 10000;

}  // namespace

TEST(Iom, Examples) {
  EXPECT_EQ(iom(std::vector<double>{0.1, 0.5, 0.5}), 2u);
  EXPECT_EQ(iom(std::vector<double>{3.0}), 1u);
  EXPECT_EQ(iom(std::vector<double>{-1.0, -2.0}), 1u);
  EXPECT_EQ(kind_of([] { iom(std::vector<double>{}); }), ErrorKind::InvalidInput);
}

TEST(Iom, TieBreakProperty) {
  Gen g(1);
  for (int c = 0; c < kCases; ++c) {
    const auto v = (c % 2 == 0) ? g.tie_heavy(g.index(1, 8)) : g.vec(g.index(1, 8));
    const std::size_t j = iom(v);
    ASSERT_GE(j, 1u);
    ASSERT_LE(j, v.size());
    for (std::size_t l = 0; l + 1 < j; ++l) ASSERT_LT(v[l], v[j - 1]);
    for (std::size_t l = j; l < v.size(); ++l) ASSERT_LE(v[l], v[j - 1]);
    ASSERT_EQ(j, iomlab::testing::brute_iom(v));
  }
}

TEST(Template, RejectsOutOfRangeEntries) {
  EXPECT_EQ(kind_of([] { T({0, 1}, 2); }), ErrorKind::InvalidInput);
  EXPECT_EQ(kind_of([] { T({3}, 2); }), ErrorKind::InvalidInput);
}

TEST(FeatureVector, RejectsNonFinite) {
  EXPECT_EQ(kind_of([] { FeatureVector({1.0, NAN}); }), ErrorKind::InvalidInput);
  EXPECT_EQ(kind_of([] { FeatureVector(std::vector<double>{}); }), ErrorKind::InvalidInput);
}

TEST(Hamming, Examples) {
  const auto u = T({1, 2, 3}, 4);
  EXPECT_EQ(hamming_distance(u, u), 0u);
  EXPECT_EQ(hamming_distance(u, T({1, 2, 4}, 4)), 1u);
  EXPECT_EQ(hamming_distance(T({1, 1}, 2), T({2, 2}, 2)), 2u);
  EXPECT_EQ(kind_of([&] { hamming_distance(u, T({1, 2}, 4)); }), ErrorKind::InvalidInput);
}

TEST(Hamming, MetricAxioms) {
  Gen g(2);
  for (int c = 0; c < kCases; ++c) {
    const std::size_t m = g.index(1, 12);
    const std::size_t k = g.index(1, 4);
    const auto a = g.tmpl(m, k);
    const auto b = g.tmpl(m, k);
    const auto d = g.tmpl(m, k);
    ASSERT_EQ(hamming_distance(a, a), 0u);
    ASSERT_EQ(hamming_distance(a, b), hamming_distance(b, a));
    ASSERT_LE(hamming_distance(a, d), hamming_distance(a, b) + hamming_distance(b, d));
    if (hamming_distance(a, b) == 0) ASSERT_EQ(a, b);
  }
}

TEST(VerifyTemplate, Examples) {
  const auto u = T({1, 2, 3}, 6);
  EXPECT_TRUE(verify_template(u, u, 1.0));
  EXPECT_TRUE(verify_template(u, T({1, 2, 4}, 6), 0.06));
  EXPECT_FALSE(verify_template(u, T({4, 5, 6}, 6), 0.11));
  EXPECT_DOUBLE_EQ(comparison_score(u, T({1, 2, 4}, 6)), 2.0 / 3.0);
}

TEST(VerifyTemplate, SelfAlwaysAccepted) {
  Gen g(3);
  for (int c = 0; c < kCases; ++c) {
    const auto u = g.tmpl(g.index(1, 40), g.index(1, 16));
    ASSERT_TRUE(verify_template(u, u, g.real(0.0, 1.0)));
  }
  const auto u = g.tmpl(10, 3);
  EXPECT_TRUE(verify_template(u, u, 0.0));
  EXPECT_TRUE(verify_template(u, u, 1.0));
}

TEST(Euclidean, Examples) {
  const std::vector<double> x{0.3, -0.2};
  EXPECT_EQ(euclidean_distance(x, x), 0.0);
  EXPECT_DOUBLE_EQ(euclidean_distance(std::vector<double>{1, 0}, std::vector<double>{0, 0}), 1.0);
  EXPECT_DOUBLE_EQ(euclidean_distance(std::vector<double>{3, 4}, std::vector<double>{0, 0}), 5.0);
  EXPECT_EQ(kind_of([] { euclidean_distance(std::vector<double>{1}, std::vector<double>{1, 2}); }),
            ErrorKind::InvalidInput);
}

TEST(Similarity, Examples) {
  const std::vector<double> x{0.5, -1.5, 2.0};
  const std::vector<double> neg{-0.5, 1.5, -2.0};
  EXPECT_DOUBLE_EQ(similarity_score(x, x), 0.5);
  EXPECT_DOUBLE_EQ(similarity_score(x, neg), -0.5);
  EXPECT_EQ(similarity_score(std::vector<double>{1, 0}, std::vector<double>{0, 1}), 0.0);
  EXPECT_EQ(similarity_score(std::vector<double>{0, 0}, std::vector<double>{0, 1}), 0.0);
  EXPECT_EQ(kind_of([] { similarity_score(std::vector<double>{0, 0}, std::vector<double>{0, 0}); }),
            ErrorKind::DegenerateInput);
}

TEST(Similarity, DistanceIdentity) {
  Gen g(4);
  for (int c = 0; c < kCases; ++c) {
    const std::size_t n = g.index(1, 300);
    const double scale = std::pow(10.0, g.real(-3.0, 3.0));
    const auto x = g.vec(n, -scale, scale);
    const auto y = g.vec(n, -scale, scale);
    double energy = 0.0;
    for (std::size_t i = 0; i < n; ++i) energy += x[i] * x[i] + y[i] * y[i];
    const double d = euclidean_distance(x, y);
    const double s = similarity_score(x, y);
    ASSERT_NEAR(s, 0.5 * (1.0 - d * d / energy), 1e-9);
    ASSERT_LE(s, 0.5 + 1e-12);
    ASSERT_NEAR(s, iomlab::testing::naive_similarity(x, y), 1e-9);
  }
}

TEST(VerifyFeature, Examples) {
  const std::vector<double> x{0.1, 0.2, -0.3};
  FeatureThresholds th;
  EXPECT_TRUE(verify_feature(x, x, th, FeatureMetric::Euclidean));
  EXPECT_TRUE(verify_feature(x, x, th, FeatureMetric::Similarity));
  // d = 0.2 exactly along one axis.
  const std::vector<double> y{0.1, 0.4, -0.3};
  EXPECT_NEAR(euclidean_distance(x, y), 0.2, 1e-15);
  EXPECT_TRUE(verify_feature(x, y, th, FeatureMetric::Euclidean));
  th.tau_euc = 0.1;
  EXPECT_FALSE(verify_feature(x, y, th, FeatureMetric::Euclidean));
}

TEST(Thresholds, Validation) {
  FeatureThresholds th;
  th.tau_sim = 0.6;
  EXPECT_EQ(kind_of([&] { th.validate(); }), ErrorKind::InvalidInput);
  th.tau_sim = 0.13;
  th.tau_euc = -1.0;
  EXPECT_EQ(kind_of([&] { th.validate(); }), ErrorKind::InvalidInput);
}

TEST(SchemeParams, Validation) {
  SchemeParams p;
  EXPECT_NO_THROW(p.validate());
  p.k = 300;
  EXPECT_EQ(kind_of([&] { p.validate(); }), ErrorKind::InvalidInput);
  p = {};
  p.tau = 1.5;
  EXPECT_EQ(kind_of([&] { p.validate(); }), ErrorKind::InvalidInput);
  p = {};
  p.m = 0;
  EXPECT_EQ(kind_of([&] { p.validate(); }), ErrorKind::InvalidInput);
}
