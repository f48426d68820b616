#include <gtest/gtest.h>

#include "diva/error.hpp"
#include "diva/metrics.hpp"
#include "oracles/oracles.hpp"

namespace {

using namespace diva;

TEST(Prf1, HandValues) {
  const auto r = prf1({"a", "b"}, {"b", "c", "d"});
  EXPECT_DOUBLE_EQ(r.precision, 0.5);
  EXPECT_DOUBLE_EQ(r.recall, 1.0 / 3.0);
  EXPECT_NEAR(r.f1, 0.4, 1e-15);
  const auto empty = prf1({}, {"a"});
  EXPECT_DOUBLE_EQ(empty.precision, 0.0);
  EXPECT_DOUBLE_EQ(empty.f1, 0.0);
}

TEST(Ndcg, HandValue) {
  const std::vector<Label> ranked{"x", "g"};
  EXPECT_NEAR(ndcg(ranked, {"g"}), 1.0 / std::log2(3.0), 1e-12);
  EXPECT_NEAR(ndcg(ranked, {"g"}), 0.6309, 1e-4);
  const std::vector<Label> dup{"g", "g"};
  EXPECT_THROW(ndcg(dup, {"g"}), ValidationError);
}

TEST(Propensity, MatchesOracleAndIsMonotone) {
  EXPECT_NEAR(propensity(0.5, 100), oracle::propensity(0.5, 100.0), 1e-12);
  EXPECT_LT(propensity(0.01, 100), propensity(0.5, 100));
}

TEST(Propensity, ZeroExponentCollapsesToInverseLog) {
  for (double prior : {0.0, 0.3, 1.0}) {
    EXPECT_NEAR(propensity(prior, 50, 0.0, 1.5), 1.0 / std::log(50.0), 1e-12);
  }
}

TEST(Propensity, CappedAtOneForTinyCorpora) {
  EXPECT_LE(propensity(0.5, 2), 1.0);
}

TEST(Psp, HandValue) {
  const PropensityTable p{{"r", 0.5}, {"f", 1.0}};
  const std::vector<Label> ranked{"f"};
  EXPECT_NEAR(psp(ranked, {"r", "f"}, p), 0.5, 1e-15);
  std::map<std::string, double> pm(p.begin(), p.end());
  EXPECT_NEAR(psp(ranked, {"r", "f"}, p), oracle::psp({"f"}, {"r", "f"}, pm), 1e-15);
}

TEST(Psp, UnitPropensitiesWithShortReferenceNormalizeByReferenceSize) {
  const PropensityTable unit{{"a", 1.0}};
  const std::vector<Label> ranked{"a", "x", "y"};
  EXPECT_NEAR(psp(ranked, {"a"}, unit), 1.0, 1e-15);
}

TEST(Psp, MissingPropensityNamesLabel) {
  const std::vector<Label> ranked{"a"};
  try {
    psp(ranked, {"a", "b"}, PropensityTable{{"a", 1.0}});
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("'b'"), std::string::npos) << e.what();
  }
}

TEST(Psndcg, PerfectRankingScoresOne) {
  const PropensityTable p{{"a", 0.3}, {"b", 0.9}};
  const std::vector<Label> ranked{"a", "b"};
  EXPECT_NEAR(psndcg(ranked, {"a", "b"}, p), 1.0, 1e-12);
}

TEST(Soft, HandValues) {
  EmbeddingTable t(3);
  // cos(u, v) = 0.8 and cos(u, w) = 0.3 with unit vectors.
  t.add("u", {1, 0, 0});
  t.add("v", {0.8, 0.6, 0});
  t.add("w", {0.3, 0, std::sqrt(1 - 0.09)});
  const auto s = soft_scores({"u"}, {"v", "w"}, t);
  EXPECT_NEAR(s.precision, 0.8, 1e-12);
  EXPECT_NEAR(s.recall, 0.55, 1e-12);
  EXPECT_NEAR(s.f1, 2 * 0.8 * 0.55 / 1.35, 1e-12);
  EXPECT_NEAR(s.f1, 0.6519, 1e-4);
  EXPECT_THROW(soft_scores({"u"}, {"nope"}, t), ValidationError);
}

TEST(Coverage, JaccardAndEmptyReference) {
  EXPECT_DOUBLE_EQ(coverage({"a", "b"}, {"b", "c"}), 1.0 / 3.0);
  EXPECT_THROW(coverage({"a"}, {}), ValidationError);
}

Corpus eval_corpus() {
  return Corpus({make_song("s1", {"a b c"}, {"a"}, LabelSet{"a", "b"}, {}),
                 make_song("s2", {"c d"}, {"c"}, LabelSet{"c", "d"}, {})},
                {});
}

TEST(Evaluate, GoldSetAveragesPerSong) {
  const std::vector<RankedPrediction> preds{{"s1", {"a", "b"}}, {"s2", {"d"}}};
  const auto e = evaluate(preds, eval_corpus(), TestSet::kGold);
  ASSERT_EQ(e.per_song.size(), 2u);
  EXPECT_DOUBLE_EQ(*e.summary.precision, 0.25);
  EXPECT_DOUBLE_EQ(*e.summary.recall, 0.5);
  EXPECT_TRUE(e.summary.psp.has_value());
  EXPECT_FALSE(e.summary.soft_f1.has_value());
}

TEST(Evaluate, CompleteSetReportsCoverageWithoutPsp) {
  const std::vector<RankedPrediction> preds{{"s1", {"a", "b"}}, {"s2", {"c"}}};
  const auto e = evaluate(preds, eval_corpus(), TestSet::kComplete);
  EXPECT_DOUBLE_EQ(*e.summary.coverage, 0.75);
  EXPECT_FALSE(e.summary.psp.has_value());
}

TEST(Evaluate, CompleteSetNeedsCompleteLabels) {
  const Corpus c({make_song("s1", {"a"}, {"a"}, std::nullopt, {})}, {});
  const std::vector<RankedPrediction> preds{{"s1", {"a"}}};
  EXPECT_THROW(evaluate(preds, c, TestSet::kComplete), ValidationError);
}

TEST(Evaluate, UnknownSongIsRejected) {
  const std::vector<RankedPrediction> preds{{"ghost", {"a"}}};
  EXPECT_THROW(evaluate(preds, eval_corpus(), TestSet::kGold), ValidationError);
}

}  // namespace
