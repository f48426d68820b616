#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace diva {

using Label = std::string;
// Ordered so that every iteration over labels is deterministic.
using LabelSet = std::set<Label, std::less<>>;

// Lowercased tokens split on whitespace and ASCII punctuation, stopwords
// removed. Order and duplicates are preserved.
std::vector<std::string> tokenize(std::string_view text, const LabelSet& stopwords);

struct Song {
  std::string id;
  std::vector<std::string> comments;
  std::vector<std::string> tokens;
  LabelSet gold_labels;
  std::optional<LabelSet> complete_labels;

  // Distinct tokens with their multiplicities.
  std::map<std::string, std::uint32_t, std::less<>> token_counts;

  std::uint32_t count(std::string_view token) const;
  bool has_token(std::string_view token) const { return count(token) > 0; }
  LabelSet distinct_tokens() const;
};

// Tokenizes the comments and fills counts. Throws ValidationError when a
// complete label set is given that is not nested as gold <= complete <= tokens.
Song make_song(std::string id, std::vector<std::string> comments, LabelSet gold,
               std::optional<LabelSet> complete, const LabelSet& stopwords);

class Corpus {
 public:
  Corpus() = default;
  // Throws ValidationError on duplicate song ids.
  Corpus(std::vector<Song> songs, LabelSet stopwords);

  const std::vector<Song>& songs() const noexcept { return songs_; }
  const LabelSet& gold_vocab() const noexcept { return gold_vocab_; }
  const LabelSet& stopwords() const noexcept { return stopwords_; }
  std::size_t n_songs() const noexcept { return songs_.size(); }

  // Index of the song with this id, if any.
  std::optional<std::size_t> find(std::string_view id) const;
  bool has_complete_labels() const;

 private:
  std::vector<Song> songs_;
  LabelSet gold_vocab_;
  LabelSet stopwords_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Distinct tokens of the song plus its gold labels.
LabelSet training_candidates(const Song& song);

// Gold vocabulary plus distinct tokens, minus the song's own gold labels.
LabelSet inference_candidates(const Song& song, const LabelSet& gold_vocab);

LabelSet read_stopwords(std::istream& in);
LabelSet load_stopwords(const std::string& path);

// JSON Lines: {"id", "comments", "gold_labels", optional "complete_labels"}.
Corpus read_corpus(std::istream& in, const LabelSet& stopwords,
                   const std::string& source = "<stream>");
Corpus load_corpus(const std::string& path, const std::string& stopword_path);
void write_corpus(std::ostream& out, const Corpus& corpus);
void write_stopwords(std::ostream& out, const LabelSet& stopwords);

// Content hash over ids, comments and label sets, in file order.
std::string corpus_fingerprint(const Corpus& corpus);

struct SyntheticConfig {
  std::size_t n_songs = 200;
  // Number of distinct label words across all topics.
  std::size_t vocab_size = 64;
  std::size_t labels_per_song_gold = 2;
  std::size_t labels_per_song_complete = 6;
  std::size_t comments_per_song = 10;
  std::size_t words_per_comment = 12;
  // Share of non-stopword filler slots that carry a noise token.
  double noise_token_ratio = 0.7;
  std::uint64_t seed = 7;

  // 0 picks vocab_size / (labels_per_song_complete + 2).
  std::size_t n_topics = 0;
  // Share of each topic's labels that experts never use as gold labels.
  double oov_fraction = 0.5;
  // 0 picks 6 * vocab_size.
  std::size_t noise_vocab_size = 0;
  double stopword_ratio = 0.1;
  // Share of non-stopword filler slots that mention a label word drawn from
  // the whole label vocabulary, so label words also turn up off-topic.
  double background_label_ratio = 0.25;

  void validate() const;
};

// The label and filler layout implied by a SyntheticConfig. A pure function
// of the config, shared by the corpus and embedding generators.
struct SyntheticVocabulary {
  struct Topic {
    std::vector<Label> expert_labels;  // may appear as gold labels
    std::vector<Label> user_labels;    // never gold
  };
  std::vector<Topic> topics;
  std::vector<std::string> noise_words;  // Zipf-ranked, most frequent first
  std::vector<std::string> stopwords;
};

SyntheticVocabulary synthetic_vocabulary(const SyntheticConfig& config);

Corpus generate_synthetic(const SyntheticConfig& config);

}  // namespace diva
