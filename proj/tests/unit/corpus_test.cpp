#include <gtest/gtest.h>

#include <sstream>

#include "diva/corpus.hpp"
#include "diva/error.hpp"

namespace {

using namespace diva;

TEST(Tokenize, LowercasesSplitsOnPunctuationAndDropsStopwords) {
  const auto t = tokenize("Great SONG, the best-ever!", {"the"});
  EXPECT_EQ(t, (std::vector<std::string>{"great", "song", "best", "ever"}));
}

TEST(Tokenize, KeepsMultibyteCharactersInsideTokens) {
  const auto t = tokenize("café olé", {});
  EXPECT_EQ(t, (std::vector<std::string>{"café", "olé"}));
}

TEST(MakeSong, CountsTokens) {
  const Song s = make_song("s", {"x x y", "y z"}, {"x"}, std::nullopt, {});
  EXPECT_EQ(s.tokens.size(), 5u);
  EXPECT_EQ(s.count("x"), 2u);
  EXPECT_EQ(s.count("q"), 0u);
  EXPECT_EQ(s.distinct_tokens(), (LabelSet{"x", "y", "z"}));
}

TEST(MakeSong, RejectsCompleteSetMissingGoldLabel) {
  EXPECT_THROW(make_song("s", {"a b"}, {"a"}, LabelSet{"b"}, {}), ValidationError);
}

TEST(MakeSong, RejectsCompleteLabelAbsentFromComments) {
  EXPECT_THROW(make_song("s", {"a b"}, {"a"}, LabelSet{"a", "c"}, {}), ValidationError);
}

TEST(Corpus, RejectsDuplicateIds) {
  std::vector<Song> songs{make_song("s", {"a"}, {}, std::nullopt, {}),
                          make_song("s", {"b"}, {}, std::nullopt, {})};
  EXPECT_THROW(Corpus(songs, {}), ValidationError);
}

TEST(Candidates, TrainingAndInferenceSets) {
  const Song s = make_song("s", {"a b c"}, {"a", "g"}, std::nullopt, {});
  EXPECT_EQ(training_candidates(s), (LabelSet{"a", "b", "c", "g"}));
  EXPECT_EQ(inference_candidates(s, {"a", "g", "h"}), (LabelSet{"b", "c", "h"}));
}

TEST(CorpusIo, RoundTripsThroughJsonLines) {
  std::vector<Song> songs{make_song("s1", {"Red blue", "green"}, {"red"}, LabelSet{"red", "blue"}, {}),
                          make_song("s2", {"yellow"}, {}, LabelSet{"yellow"}, {})};
  const Corpus c(songs, {});
  std::stringstream buf;
  write_corpus(buf, c);
  const Corpus back = read_corpus(buf, {});
  ASSERT_EQ(back.n_songs(), 2u);
  EXPECT_EQ(back.songs()[0].gold_labels, (LabelSet{"red"}));
  EXPECT_EQ(*back.songs()[0].complete_labels, (LabelSet{"blue", "red"}));
  EXPECT_EQ(corpus_fingerprint(back), corpus_fingerprint(c));
  EXPECT_TRUE(back.has_complete_labels());
}

TEST(CorpusIo, MalformedLineReportsParseError) {
  std::stringstream in("{\"id\":\"s\",\"comments\":[\"a\"],\"gold_labels\":[]}\n{oops\n");
  try {
    read_corpus(in, {}, "mem");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("mem"), std::string::npos);
  }
}

TEST(CorpusIo, MissingFileIsIoError) {
  EXPECT_THROW(load_corpus("/nonexistent/corpus.jsonl", ""), IoError);
}

TEST(Synthetic, IsDeterministicAndNested) {
  SyntheticConfig cfg;
  cfg.n_songs = 30;
  const Corpus a = generate_synthetic(cfg);
  const Corpus b = generate_synthetic(cfg);
  EXPECT_EQ(corpus_fingerprint(a), corpus_fingerprint(b));
  for (const Song& s : a.songs()) {
    ASSERT_TRUE(s.complete_labels);
    EXPECT_EQ(s.gold_labels.size(), cfg.labels_per_song_gold);
    EXPECT_EQ(s.complete_labels->size(), cfg.labels_per_song_complete);
    for (const auto& g : s.gold_labels) EXPECT_TRUE(s.complete_labels->contains(g));
    for (const auto& c : *s.complete_labels) EXPECT_TRUE(s.has_token(c));
  }
}

TEST(Synthetic, SeedChangesCorpus) {
  SyntheticConfig cfg;
  cfg.n_songs = 10;
  const auto fa = corpus_fingerprint(generate_synthetic(cfg));
  cfg.seed = 8;
  EXPECT_NE(fa, corpus_fingerprint(generate_synthetic(cfg)));
}

TEST(Synthetic, UserLabelsNeverGold) {
  SyntheticConfig cfg;
  cfg.n_songs = 40;
  const auto vocab = synthetic_vocabulary(cfg);
  const Corpus c = generate_synthetic(cfg);
  for (const auto& topic : vocab.topics) {
    for (const auto& u : topic.user_labels) EXPECT_FALSE(c.gold_vocab().contains(u));
  }
}

TEST(Synthetic, ValidatesConfig) {
  SyntheticConfig cfg;
  cfg.vocab_size = 0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = {};
  cfg.labels_per_song_gold = 7;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = {};
  cfg.background_label_ratio = 1.5;
  EXPECT_THROW(cfg.validate(), ValidationError);
}

}  // namespace
