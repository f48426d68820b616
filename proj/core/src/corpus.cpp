#include "diva/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "diva/error.hpp"
#include "diva/rng.hpp"

namespace diva {

namespace {

bool is_delimiter(unsigned char c) {
  // Bytes >= 0x80 belong to multi-byte UTF-8 sequences and stay in the token.
  return c < 0x80 && (std::isspace(c) || std::ispunct(c));
}

std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = kDigits[v & 0xf];
    v >>= 4;
  }
  return out;
}

LabelSet label_array(const nlohmann::json& value, const char* field,
                     const std::string& source, std::size_t line) {
  if (!value.is_array()) {
    throw ParseError(source, line, std::string("field '") + field + "' must be an array");
  }
  LabelSet out;
  for (const auto& item : value) {
    if (!item.is_string()) {
      throw ParseError(source, line, std::string("field '") + field + "' must hold strings");
    }
    out.insert(item.get<std::string>());
  }
  return out;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text, const LabelSet& stopwords) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      if (!stopwords.contains(current)) tokens.push_back(current);
      current.clear();
    }
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_delimiter(c)) {
      flush();
    } else {
      current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    }
  }
  flush();
  return tokens;
}

std::uint32_t Song::count(std::string_view token) const {
  auto it = token_counts.find(token);
  return it == token_counts.end() ? 0 : it->second;
}

LabelSet Song::distinct_tokens() const {
  LabelSet out;
  for (const auto& [token, n] : token_counts) out.insert(out.end(), token);
  return out;
}

Song make_song(std::string id, std::vector<std::string> comments, LabelSet gold,
               std::optional<LabelSet> complete, const LabelSet& stopwords) {
  Song song;
  song.id = std::move(id);
  song.comments = std::move(comments);
  for (const auto& comment : song.comments) {
    for (auto& token : tokenize(comment, stopwords)) {
      ++song.token_counts[token];
      song.tokens.push_back(std::move(token));
    }
  }
  song.gold_labels = std::move(gold);
  if (complete) {
    for (const auto& g : song.gold_labels) {
      if (!complete->contains(g)) {
        throw ValidationError("song '" + song.id + "': gold label '" + g +
                              "' missing from complete labels");
      }
    }
    for (const auto& c : *complete) {
      if (!song.has_token(c)) {
        throw ValidationError("song '" + song.id + "': complete label '" + c +
                              "' does not occur in the comments");
      }
    }
  }
  song.complete_labels = std::move(complete);
  return song;
}

Corpus::Corpus(std::vector<Song> songs, LabelSet stopwords)
    : songs_(std::move(songs)), stopwords_(std::move(stopwords)) {
  index_.reserve(songs_.size());
  for (std::size_t i = 0; i < songs_.size(); ++i) {
    if (!index_.emplace(songs_[i].id, i).second) {
      throw ValidationError("duplicate song id '" + songs_[i].id + "'");
    }
    gold_vocab_.insert(songs_[i].gold_labels.begin(), songs_[i].gold_labels.end());
  }
}

std::optional<std::size_t> Corpus::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool Corpus::has_complete_labels() const {
  return !songs_.empty() &&
         std::all_of(songs_.begin(), songs_.end(),
                     [](const Song& s) { return s.complete_labels.has_value(); });
}

LabelSet training_candidates(const Song& song) {
  LabelSet out = song.distinct_tokens();
  out.insert(song.gold_labels.begin(), song.gold_labels.end());
  return out;
}

LabelSet inference_candidates(const Song& song, const LabelSet& gold_vocab) {
  LabelSet out;
  for (const auto& y : gold_vocab) {
    if (!song.gold_labels.contains(y)) out.insert(out.end(), y);
  }
  for (const auto& [token, n] : song.token_counts) {
    if (!song.gold_labels.contains(token)) out.insert(token);
  }
  return out;
}

LabelSet read_stopwords(std::istream& in) {
  LabelSet out;
  std::string line;
  while (std::getline(in, line)) {
    for (auto& token : tokenize(line, {})) out.insert(std::move(token));
  }
  return out;
}

LabelSet load_stopwords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open stopword file '" + path + "'");
  return read_stopwords(in);
}

Corpus read_corpus(std::istream& in, const LabelSet& stopwords, const std::string& source) {
  std::vector<Song> songs;
  std::string line;
  std::size_t line_no = 0;
  std::unordered_map<std::string, std::size_t> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (std::all_of(line.begin(), line.end(),
                    [](unsigned char c) { return std::isspace(c); })) {
      continue;
    }
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(source, line_no, e.what());
    }
    if (!record.is_object()) throw ParseError(source, line_no, "record must be an object");
    if (!record.contains("id") || !record["id"].is_string()) {
      throw ParseError(source, line_no, "missing string field 'id'");
    }
    if (!record.contains("comments") || !record["comments"].is_array()) {
      throw ParseError(source, line_no, "missing array field 'comments'");
    }
    if (!record.contains("gold_labels")) {
      throw ParseError(source, line_no, "missing array field 'gold_labels'");
    }
    std::string id = record["id"].get<std::string>();
    if (auto [it, fresh] = seen.emplace(id, line_no); !fresh) {
      throw ValidationError(source + ":" + std::to_string(line_no) + ": duplicate song id '" +
                            id + "' (first seen on line " + std::to_string(it->second) + ")");
    }
    std::vector<std::string> comments;
    for (const auto& c : record["comments"]) {
      if (!c.is_string()) throw ParseError(source, line_no, "comments must be strings");
      comments.push_back(c.get<std::string>());
    }
    LabelSet gold = label_array(record["gold_labels"], "gold_labels", source, line_no);
    std::optional<LabelSet> complete;
    if (record.contains("complete_labels") && !record["complete_labels"].is_null()) {
      complete = label_array(record["complete_labels"], "complete_labels", source, line_no);
    }
    try {
      songs.push_back(make_song(std::move(id), std::move(comments), std::move(gold),
                                std::move(complete), stopwords));
    } catch (const ValidationError& e) {
      throw ParseError(source, line_no, e.what());
    }
    const Song& song = songs.back();
    for (const auto& g : song.gold_labels) {
      if (!song.has_token(g)) {
        spdlog::debug("{}:{}: gold label '{}' of song '{}' does not occur in its comments",
                      source, line_no, g, song.id);
      }
    }
  }
  return Corpus(std::move(songs), stopwords);
}

Corpus load_corpus(const std::string& path, const std::string& stopword_path) {
  LabelSet stopwords = stopword_path.empty() ? LabelSet{} : load_stopwords(stopword_path);
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file '" + path + "'");
  return read_corpus(in, stopwords, path);
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const Song& song : corpus.songs()) {
    nlohmann::ordered_json record;
    record["id"] = song.id;
    record["comments"] = song.comments;
    record["gold_labels"] = std::vector<std::string>(song.gold_labels.begin(),
                                                     song.gold_labels.end());
    if (song.complete_labels) {
      record["complete_labels"] = std::vector<std::string>(song.complete_labels->begin(),
                                                           song.complete_labels->end());
    }
    out << record.dump() << '\n';
  }
}

void write_stopwords(std::ostream& out, const LabelSet& stopwords) {
  for (const auto& w : stopwords) out << w << '\n';
}

std::string corpus_fingerprint(const Corpus& corpus) {
  std::ostringstream buffer;
  write_corpus(buffer, corpus);
  write_stopwords(buffer, corpus.stopwords());
  return hex64(fnv1a64(buffer.str()));
}

void SyntheticConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ValidationError(std::string("synthetic config: ") + what);
  };
  require(n_songs > 0, "n_songs must be positive");
  require(vocab_size > 0, "vocab_size must be positive");
  require(labels_per_song_gold > 0, "labels_per_song_gold must be positive");
  require(labels_per_song_complete > 0, "labels_per_song_complete must be positive");
  require(comments_per_song > 0, "comments_per_song must be positive");
  require(words_per_comment > 0, "words_per_comment must be positive");
  require(labels_per_song_gold <= labels_per_song_complete,
          "labels_per_song_gold exceeds labels_per_song_complete");
  require(comments_per_song * words_per_comment >= labels_per_song_complete,
          "too few words per song to plant every complete label");
  require(noise_token_ratio >= 0.0 && noise_token_ratio <= 1.0,
          "noise_token_ratio must lie in [0, 1]");
  require(stopword_ratio >= 0.0 && stopword_ratio < 1.0, "stopword_ratio must lie in [0, 1)");
  require(background_label_ratio >= 0.0 && background_label_ratio <= 1.0,
          "background_label_ratio must lie in [0, 1]");
  require(oov_fraction >= 0.0 && oov_fraction < 1.0, "oov_fraction must lie in [0, 1)");

  const std::size_t topics =
      n_topics ? n_topics : std::max<std::size_t>(1, vocab_size / (labels_per_song_complete + 2));
  require(topics <= vocab_size, "more topics than labels");
  const std::size_t smallest = vocab_size / topics;
  require(smallest >= labels_per_song_complete,
          "topics too small to hold labels_per_song_complete labels");
  const auto experts = static_cast<std::size_t>(
      std::lround((1.0 - oov_fraction) * static_cast<double>(smallest)));
  require(std::max(experts, labels_per_song_gold) <= smallest,
          "topics too small to hold labels_per_song_gold expert labels");
}

SyntheticVocabulary synthetic_vocabulary(const SyntheticConfig& config) {
  config.validate();
  SyntheticVocabulary vocab;
  const std::size_t topics =
      config.n_topics ? config.n_topics
                      : std::max<std::size_t>(1, config.vocab_size /
                                                     (config.labels_per_song_complete + 2));
  vocab.topics.resize(topics);
  for (std::size_t t = 0; t < topics; ++t) {
    const std::size_t size =
        config.vocab_size / topics + (t < config.vocab_size % topics ? 1 : 0);
    auto experts = static_cast<std::size_t>(
        std::lround((1.0 - config.oov_fraction) * static_cast<double>(size)));
    experts = std::clamp(experts, config.labels_per_song_gold, size);
    for (std::size_t j = 0; j < size; ++j) {
      const std::string name = "t" + std::to_string(t) + (j < experts ? "e" : "u") +
                               std::to_string(j < experts ? j : j - experts);
      (j < experts ? vocab.topics[t].expert_labels : vocab.topics[t].user_labels)
          .push_back(name);
    }
  }
  const std::size_t noise =
      config.noise_vocab_size ? config.noise_vocab_size : 6 * config.vocab_size;
  for (std::size_t i = 0; i < noise; ++i) vocab.noise_words.push_back("w" + std::to_string(i));
  vocab.stopwords = {"a", "and", "i", "is", "it", "of", "the", "this", "to", "you"};
  return vocab;
}

Corpus generate_synthetic(const SyntheticConfig& config) {
  const SyntheticVocabulary vocab = synthetic_vocabulary(config);
  const LabelSet stopwords(vocab.stopwords.begin(), vocab.stopwords.end());

  // Zipf(1) over the noise words.
  std::vector<double> cumulative(vocab.noise_words.size());
  double total = 0.0;
  for (std::size_t i = 0; i < cumulative.size(); ++i) {
    total += 1.0 / static_cast<double>(i + 1);
    cumulative[i] = total;
  }

  std::vector<Label> all_labels;
  for (const auto& topic : vocab.topics) {
    all_labels.insert(all_labels.end(), topic.expert_labels.begin(), topic.expert_labels.end());
    all_labels.insert(all_labels.end(), topic.user_labels.begin(), topic.user_labels.end());
  }

  const Rng root(config.seed);
  const std::size_t words_per_song = config.comments_per_song * config.words_per_comment;
  std::vector<Song> songs;
  songs.reserve(config.n_songs);
  for (std::size_t i = 0; i < config.n_songs; ++i) {
    Rng rng = root.derive("song", i);
    const auto& topic = vocab.topics[rng.index(vocab.topics.size())];

    std::vector<Label> gold;
    for (std::size_t k : rng.sample_indices(topic.expert_labels.size(),
                                            config.labels_per_song_gold)) {
      gold.push_back(topic.expert_labels[k]);
    }
    std::vector<Label> pool;
    for (const auto& y : topic.expert_labels) {
      if (std::find(gold.begin(), gold.end(), y) == gold.end()) pool.push_back(y);
    }
    pool.insert(pool.end(), topic.user_labels.begin(), topic.user_labels.end());
    std::vector<Label> complete = gold;
    for (std::size_t k : rng.sample_indices(
             pool.size(), config.labels_per_song_complete - config.labels_per_song_gold)) {
      complete.push_back(pool[k]);
    }

    std::vector<std::string> words(complete.begin(), complete.end());
    while (words.size() < words_per_song) {
      if (rng.uniform() < config.stopword_ratio) {
        words.push_back(vocab.stopwords[rng.index(vocab.stopwords.size())]);
      } else if (rng.uniform() < config.background_label_ratio) {
        words.push_back(all_labels[rng.index(all_labels.size())]);
      } else if (rng.uniform() < config.noise_token_ratio) {
        const double u = rng.uniform() * total;
        const auto k = static_cast<std::size_t>(
            std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
        words.push_back(vocab.noise_words[std::min(k, cumulative.size() - 1)]);
      } else {
        words.push_back(complete[rng.index(complete.size())]);
      }
    }
    rng.shuffle(words);

    std::vector<std::string> comments;
    for (std::size_t c = 0; c < config.comments_per_song; ++c) {
      std::string text;
      for (std::size_t w = 0; w < config.words_per_comment; ++w) {
        if (w) text += ' ';
        text += words[c * config.words_per_comment + w];
      }
      text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
      if (rng.uniform() < 0.3) text += '!';
      comments.push_back(std::move(text));
    }

    char id[32];
    std::snprintf(id, sizeof id, "song%05zu", i);
    songs.push_back(make_song(id, std::move(comments), LabelSet(gold.begin(), gold.end()),
                              LabelSet(complete.begin(), complete.end()), stopwords));
  }
  return Corpus(std::move(songs), stopwords);
}

}  // namespace diva
