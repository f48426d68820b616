#include <gtest/gtest.h>

#include <set>

#include "diva/rng.hpp"

namespace {

using diva::Rng;

TEST(Rng, SameSeedSameSequence) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
}

TEST(Rng, DerivedStreamsIgnoreParentState) {
  Rng parent(9);
  const Rng fresh(9);
  parent.next();
  parent.normal();
  Rng x = parent.derive("train", 3);
  Rng y = fresh.derive("train", 3);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(x.next(), y.next());
}

TEST(Rng, DistinctLabelsAndIndicesGiveDistinctStreams) {
  const Rng root(1);
  EXPECT_NE(root.derive("a").next(), root.derive("b").next());
  EXPECT_NE(root.derive("a", 0).next(), root.derive("a", 1).next());
}

TEST(Rng, UniformStaysInHalfOpenUnitInterval) {
  Rng rng(5);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Rng, SampleIndicesAreDistinctAndClamped) {
  Rng rng(3);
  const auto idx = rng.sample_indices(10, 4);
  ASSERT_EQ(idx.size(), 4u);
  EXPECT_EQ(std::set<std::size_t>(idx.begin(), idx.end()).size(), 4u);
  for (auto i : idx) EXPECT_LT(i, 10u);
  EXPECT_EQ(rng.sample_indices(3, 8).size(), 3u);
}

TEST(Rng, NormalHasRoughlyUnitMoments) {
  Rng rng(11);
  double s = 0.0, ss = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    s += x;
    ss += x * x;
  }
  EXPECT_NEAR(s / n, 0.0, 0.05);
  EXPECT_NEAR(ss / n, 1.0, 0.05);
}

TEST(Fnv, KnownVector) {
  EXPECT_EQ(diva::fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(diva::fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

}  // namespace
