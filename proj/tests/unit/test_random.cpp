#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "iomlab/random.hpp"

using namespace iomlab;

// Reference values from a separate SplitMix64 implementation.
TEST(Random, SplitMixKnownValues) {
  EXPECT_EQ(splitmix64(0), 16294208416658607535ULL);
  EXPECT_EQ(derive_seed(1, Stream::Corpus), 14512240895448352642ULL);
  EXPECT_EQ(derive_seed(7, Stream::Enrollment, 3, 1001), 12170578839924530666ULL);
  EXPECT_EQ(derive_seed(42, Stream::Link, 10, 4), 18025968927981268034ULL);
}

TEST(Random, StreamsDiffer) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 1; s <= 6; ++s) {
    for (std::uint64_t a = 0; a < 20; ++a) {
      seen.insert(derive_seed(99, static_cast<Stream>(s), a, 0));
    }
  }
  EXPECT_EQ(seen.size(), 120u);
}

TEST(Random, EngineIsStandardMt19937_64) {
  Rng rng(5489);
  std::uint64_t v = 0;
  for (int i = 0; i < 10000; ++i) v = rng.next();
  EXPECT_EQ(v, 9981545732273789042ULL);
}

TEST(Random, Deterministic) {
  Rng a(123);
  Rng b(123);
  for (int i = 0; i < 1000; ++i) {
    ASSERT_EQ(a.gaussian(), b.gaussian());
    ASSERT_EQ(a.below(17), b.below(17));
    ASSERT_EQ(a.uniform01(), b.uniform01());
  }
}

TEST(Random, BelowStaysInRange) {
  Rng rng(5);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto v = rng.below(7);
    ASSERT_LT(v, 7u);
    ++hits[v];
  }
  for (int h : hits) EXPECT_NEAR(h, 10000, 500);
  EXPECT_EQ(rng.below(1), 0u);
}

TEST(Random, UniformInUnitInterval) {
  Rng rng(11);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Random, GaussianMoments) {
  Rng rng(2024);
  const int count = 200000;
  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < count; ++i) {
    const double g = rng.gaussian();
    ASSERT_TRUE(std::isfinite(g));
    sum += g;
    sq += g * g;
  }
  const double mean = sum / count;
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_NEAR(sq / count - mean * mean, 1.0, 0.02);
}
