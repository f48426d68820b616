#pragma once

#include <map>
#include <string>
#include <string_view>

#include "diva/corpus.hpp"

namespace diva {

enum class PseudoSource { kClassifier, kJoint };

inline const char* to_string(PseudoSource s) {
  return s == PseudoSource::kClassifier ? "classifier" : "joint";
}

struct PseudoLabel {
  PseudoSource source = PseudoSource::kClassifier;
  int iteration = 0;
  double score = 0.0;

  bool operator==(const PseudoLabel&) const = default;
};

// Pseudo-labels harvested per song, unique per (song, label).
class PseudoLabelStore {
 public:
  using SongEntries = std::map<Label, PseudoLabel, std::less<>>;

  // Returns false if the pair is already present (the first entry wins).
  bool add(const std::string& song_id, const Label& label, PseudoLabel entry) {
    return songs_[song_id].emplace(label, entry).second;
  }

  bool contains(std::string_view song_id, std::string_view label) const {
    auto it = songs_.find(song_id);
    return it != songs_.end() && it->second.contains(label);
  }

  const SongEntries& entries(std::string_view song_id) const {
    static const SongEntries kEmpty;
    auto it = songs_.find(song_id);
    return it == songs_.end() ? kEmpty : it->second;
  }

  const std::map<std::string, SongEntries, std::less<>>& songs() const { return songs_; }

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& [id, entries] : songs_) n += entries.size();
    return n;
  }

  std::size_t count(PseudoSource source) const {
    std::size_t n = 0;
    for (const auto& [id, entries] : songs_) {
      for (const auto& [label, e] : entries) n += e.source == source;
    }
    return n;
  }

  // Every (song, label) pair of this store also present in `other`.
  bool subset_of(const PseudoLabelStore& other) const {
    for (const auto& [id, entries] : songs_) {
      for (const auto& [label, e] : entries) {
        if (!other.contains(id, label)) return false;
      }
    }
    return true;
  }

  void clear() { songs_.clear(); }

 private:
  std::map<std::string, SongEntries, std::less<>> songs_;
};

}  // namespace diva
