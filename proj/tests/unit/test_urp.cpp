#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "iomlab/error.hpp"
#include "iomlab/urp.hpp"
#include "testing.hpp"

using namespace iomlab;
using iomlab::testing::Gen;

TEST(Urp, SecretShapeAtPublishedScale) {
  const SchemeParams p{299, 128, 600, 2, 0.11};
  const auto s = urp_gen_secret(1, p);
  for (std::size_t i = 0; i < p.m; ++i) {
    for (std::size_t j = 0; j < p.p; ++j) {
      const auto perm = s.permutation(i, j);
      ASSERT_EQ(perm.size(), 128u);
      const std::set<std::uint32_t> distinct(perm.begin(), perm.end());
      ASSERT_EQ(distinct.size(), 128u);
      ASSERT_GE(*distinct.begin(), 1u);
      ASSERT_LE(*distinct.rbegin(), 299u);
    }
  }
}

TEST(Urp, FullPermutationWhenKEqualsN) {
  const SchemeParams p{7, 7, 5, 2, 0.5};
  const auto s = urp_gen_secret(3, p);
  for (std::size_t i = 0; i < p.m; ++i) {
    auto perm = std::vector<std::uint32_t>(s.permutation(i, 0).begin(), s.permutation(i, 0).end());
    std::sort(perm.begin(), perm.end());
    for (std::uint32_t l = 0; l < 7; ++l) ASSERT_EQ(perm[l], l + 1);
  }
}

TEST(Urp, SecretIsDeterministic) {
  const SchemeParams p{50, 10, 20, 2, 0.5};
  EXPECT_EQ(urp_gen_secret(8, p), urp_gen_secret(8, p));
  EXPECT_FALSE(urp_gen_secret(8, p) == urp_gen_secret(9, p));
}

TEST(Urp, KGreaterThanNRejected) {
  try {
    urp_gen_secret(1, {3, 4, 1, 2, 0.5});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidInput);
  }
}

TEST(Urp, HandComputedExample) {
  const UrpSecret s({4, 2, 1, 2, 0.5}, {1, 3, 2, 4});
  const auto t = urp_transform(s, std::vector<double>{1.0, 2.0, 3.0, 0.5});
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0], 1u);
}

TEST(Urp, AllOnesInputGivesAllOnes) {
  const SchemeParams p{40, 8, 30, 2, 0.5};
  const auto t = urp_transform(urp_gen_secret(2, p), std::vector<double>(40, 1.0));
  for (auto v : t.indices()) EXPECT_EQ(v, 1u);
}

TEST(Urp, DepthOneIsIomOfSubsequence) {
  Gen g(20);
  const SchemeParams p{10, 4, 6, 1, 0.5};
  const auto s = urp_gen_secret(4, p);
  const auto x = g.vec(p.n);
  const auto t = urp_transform(s, x);
  for (std::size_t i = 0; i < p.m; ++i) {
    std::vector<double> window;
    for (auto e : s.permutation(i, 0)) window.push_back(x[e - 1]);
    EXPECT_EQ(t[i], iomlab::testing::brute_iom(window));
  }
}

TEST(Urp, MatchesBruteForceOracle) {
  Gen g(21);
  for (int c = 0; c < 1000; ++c) {
    const auto p = iomlab::testing::small_params(g, 2);
    const auto s = urp_gen_secret(g.seed(), p);
    const auto x = (c % 3 == 0) ? g.tie_heavy(p.n) : g.vec(p.n);
    const auto t = urp_transform(s, x);
    ASSERT_EQ(std::vector<std::uint32_t>(t.indices().begin(), t.indices().end()),
              iomlab::testing::brute_urp(s, x));
  }
}

TEST(Urp, PositiveScalingInvariance) {
  Gen g(22);
  const SchemeParams p{12, 4, 8, 2, 0.5};
  for (int c = 0; c < 10000; ++c) {
    const auto s = urp_gen_secret(static_cast<std::uint64_t>(c % 16), p);
    const auto x = g.vec(p.n);
    auto y = x;
    const double scale = (c % 2 == 0) ? std::ldexp(1.0, static_cast<int>(g.index(0, 40)) - 20)
                                      : g.real(0.01, 100.0);
    for (auto& v : y) v *= scale;
    ASSERT_EQ(urp_transform(s, x), urp_transform(s, y));
  }
}

TEST(Urp, RejectsMalformedSecret) {
  EXPECT_THROW(UrpSecret({4, 2, 1, 2, 0.5}, {1, 1, 2, 4}), Error);
  EXPECT_THROW(UrpSecret({4, 2, 1, 2, 0.5}, {1, 5, 2, 4}), Error);
  EXPECT_THROW(UrpSecret({4, 2, 1, 2, 0.5}, {1, 3, 2}), Error);
}
