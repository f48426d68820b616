#include <gtest/gtest.h>

#include <sstream>

#include "diva/embedding.hpp"
#include "diva/error.hpp"
#include "oracles/oracles.hpp"

namespace {

using namespace diva;

EmbeddingTable small_table() {
  EmbeddingTable t(2);
  t.add("a", {1.0, 0.0});
  t.add("b", {0.0, 2.0});
  return t;
}

TEST(Embedding, ReadsTextFormat) {
  std::stringstream in("2 3\nfoo 1 2 3\nbar -1.5 0 2e-1\n");
  const EmbeddingTable t = read_embeddings(in);
  EXPECT_EQ(t.size(), 2u);
  EXPECT_EQ(t.dim(), 3u);
  EXPECT_DOUBLE_EQ((*t.find("bar"))[2], 0.2);
  EXPECT_FALSE(t.contains("baz"));
}

TEST(Embedding, RejectsRowOfWrongLength) {
  std::stringstream in("1 3\nfoo 1 2\n");
  EXPECT_THROW(read_embeddings(in), ParseError);
}

TEST(Embedding, RejectsCountMismatch) {
  std::stringstream in("3 1\nfoo 1\n");
  EXPECT_THROW(read_embeddings(in), ParseError);
}

TEST(Embedding, RejectsDuplicateToken) {
  std::stringstream in("2 1\nfoo 1\nfoo 2\n");
  EXPECT_THROW(read_embeddings(in), ValidationError);
}

TEST(Embedding, WriteReadIsLossless) {
  EmbeddingTable t(2);
  t.add("x", {0.1, 1.0 / 3.0});
  std::stringstream buf;
  write_embeddings(buf, t);
  const EmbeddingTable back = read_embeddings(buf);
  EXPECT_EQ((*back.find("x"))[1], 1.0 / 3.0);
}

TEST(Embedding, DocumentIsCountWeightedMeanOfKnownTokens) {
  const Song s = make_song("s", {"a a b zzz"}, {}, std::nullopt, {});
  const Vector d = embed_document(s, small_table());
  EXPECT_DOUBLE_EQ(d[0], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(d[1], 2.0 / 3.0);
}

TEST(Embedding, DocumentWithoutKnownTokensThrows) {
  const Song s = make_song("s", {"zzz"}, {}, std::nullopt, {});
  EXPECT_THROW(embed_document(s, small_table()), EmptyDocumentError);
}

TEST(Embedding, CosineMatchesOracleAndRejectsZero) {
  const Vector u{1.0, 2.0, -1.0}, v{0.5, -1.0, 3.0};
  EXPECT_NEAR(cosine(u, v), oracle::cosine(u, v), 1e-15);
  const Vector z{0.0, 0.0, 0.0};
  EXPECT_THROW(cosine(u, z), DegenerateVectorError);
}

TEST(Embedding, SyntheticTableCoversVocabularyAndIsUnitNorm) {
  SyntheticConfig cfg;
  const EmbeddingTable t = synthetic_embeddings(cfg, 16, 3);
  const auto vocab = synthetic_vocabulary(cfg);
  for (const auto& topic : vocab.topics) {
    for (const auto& y : topic.expert_labels) {
      ASSERT_TRUE(t.contains(y));
      EXPECT_NEAR(norm(*t.find(y)), 1.0, 1e-12);
    }
    for (const auto& y : topic.user_labels) ASSERT_TRUE(t.contains(y));
  }
}

}  // namespace
