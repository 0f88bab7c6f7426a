#include <gtest/gtest.h>

#include "iomlab/error.hpp"
#include "iomlab/grp.hpp"
#include "iomlab/random.hpp"
#include "testing.hpp"

using namespace iomlab;
using iomlab::testing::Gen;

TEST(Grp, SecretShapeAtPublishedScale) {
  const SchemeParams p{299, 16, 300, 1, 0.06};
  const auto s = grp_gen_secret(7, p);
  ASSERT_EQ(s.size(), 300u);
  for (std::size_t i = 0; i < s.size(); ++i) {
    ASSERT_EQ(s.projection(i).rows(), 299);
    ASSERT_EQ(s.projection(i).cols(), 16);
  }
}

TEST(Grp, EntriesAreStandardGaussian) {
  const SchemeParams p{299, 16, 300, 1, 0.06};
  const auto s = grp_gen_secret(2020, p);
  double sum = 0.0;
  double sq = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    sum += s.projection(i).sum();
    sq += s.projection(i).squaredNorm();
    count += static_cast<std::size_t>(s.projection(i).size());
  }
  ASSERT_EQ(count, 1435200u);
  const double mean = sum / static_cast<double>(count);
  const double var = sq / static_cast<double>(count) - mean * mean;
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_NEAR(var, 1.0, 0.05);
}

TEST(Grp, SecretIsDeterministic) {
  const SchemeParams p{20, 4, 10, 1, 0.5};
  EXPECT_EQ(grp_gen_secret(99, p), grp_gen_secret(99, p));
  EXPECT_FALSE(grp_gen_secret(99, p) == grp_gen_secret(100, p));
}

TEST(Grp, GenerationOrderIsMatrixColumnRow) {
  const SchemeParams p{3, 2, 2, 1, 0.5};
  const auto s = grp_gen_secret(5, p);
  Rng rng(5);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      for (std::size_t r = 0; r < 3; ++r) ASSERT_EQ(s.projection(i)(r, j), rng.gaussian());
    }
  }
}

TEST(Grp, HandComputedExample) {
  Eigen::MatrixXd w(2, 2);
  w << 1, 0, 0, 1;
  const GrpSecret s({2, 2, 1, 1, 0.5}, {w});
  const auto t = grp_transform(s, std::vector<double>{1.0, 2.0});
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0], 2u);
}

TEST(Grp, ZeroInputGivesAllOnes) {
  const SchemeParams p{30, 8, 50, 1, 0.5};
  const auto t = grp_transform(grp_gen_secret(1, p), std::vector<double>(30, 0.0));
  for (auto v : t.indices()) EXPECT_EQ(v, 1u);
}

TEST(Grp, DimensionMismatch) {
  const SchemeParams p{5, 2, 3, 1, 0.5};
  try {
    grp_transform(grp_gen_secret(1, p), std::vector<double>(4, 0.1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidInput);
  }
}

TEST(Grp, MatchesBruteForceOracle) {
  Gen g(10);
  for (int c = 0; c < 1000; ++c) {
    const auto p = iomlab::testing::small_params(g, 1);
    const auto s = grp_gen_secret(g.seed(), p);
    const auto x = (c % 3 == 0) ? g.tie_heavy(p.n) : g.vec(p.n);
    const auto t = grp_transform(s, x);
    const auto ref = iomlab::testing::brute_grp(s, x);
    ASSERT_EQ(std::vector<std::uint32_t>(t.indices().begin(), t.indices().end()), ref);
    ASSERT_EQ(t, grp_transform(s, x));
  }
}

TEST(Grp, PositiveScalingInvariance) {
  Gen g(11);
  const SchemeParams p{12, 4, 8, 1, 0.5};
  for (int c = 0; c < 10000; ++c) {
    const auto s = grp_gen_secret(static_cast<std::uint64_t>(c % 16), p);
    const auto x = g.vec(p.n);
    auto y = x;
    // Powers of two keep the projections exact, so ties survive the scaling.
    const double scale = std::ldexp(1.0, static_cast<int>(g.index(0, 40)) - 20);
    for (auto& v : y) v *= scale;
    ASSERT_EQ(grp_transform(s, x), grp_transform(s, y));
  }
}

TEST(Grp, ScalingInvarianceGenericFactor) {
  Gen g(12);
  const SchemeParams p{12, 4, 8, 1, 0.5};
  const auto s = grp_gen_secret(3, p);
  for (int c = 0; c < 10000; ++c) {
    const auto x = g.vec(p.n);
    auto y = x;
    const double scale = g.real(0.01, 100.0);
    for (auto& v : y) v *= scale;
    ASSERT_EQ(grp_transform(s, x), grp_transform(s, y));
  }
}
