#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "diva/classifier.hpp"
#include "diva/corpus.hpp"
#include "diva/embedding.hpp"
#include "diva/rng.hpp"

namespace diva {

enum class SnAggregation { kMin, kMax };

struct ScoreConfig {
  std::size_t m = 5;
  // 0 means ceil(sqrt(number of known labels)).
  std::size_t k = 0;
  std::size_t kmeans_iters = 50;
  double tau = 0.5;
  std::size_t top_n = 5;
  // When set, select every candidate with j >= this value instead of top_n.
  std::optional<double> global_threshold;
  bool enable_si = true;
  bool enable_sn = true;
  bool enable_pv = true;
  bool enable_da = true;
  SnAggregation sn_aggregation = SnAggregation::kMin;
  std::uint64_t seed = 0;

  void validate() const;
};

struct JointScoreBreakdown {
  Label label;
  double si = 0.0;
  double sn = 0.0;
  int pv = 0;
  int da = 0;
  double j = 0.0;
};

// Per-token document frequency and occurrence counts across the corpus.
class CorpusStatistics {
 public:
  explicit CorpusStatistics(const Corpus& corpus);

  std::size_t n_songs() const noexcept { return n_songs_; }
  std::size_t document_frequency(std::string_view token) const;
  // Occurrence counts of the token in each song that contains it.
  std::span<const std::uint32_t> nonzero_counts(std::string_view token) const;

 private:
  std::size_t n_songs_;
  std::unordered_map<std::string, std::vector<std::uint32_t>> counts_;
};

// (count in song / tokens in song) * ln(N / document frequency); 0 when the
// label is absent from the song or from every song.
double tf_idf(std::string_view label, const Song& song, const CorpusStatistics& stats);
double tf_idf(std::string_view label, const Song& song, const Corpus& corpus);

// m independent k-means clusterings of the known labels' vectors.
class ClusterEnsemble {
 public:
  ClusterEnsemble() = default;
  static ClusterEnsemble build(std::span<const Vector> points, std::size_t m, std::size_t k,
                               std::size_t iters, Rng& rng);
  static ClusterEnsemble from_centers(std::vector<std::vector<Vector>> clusterings);

  bool empty() const noexcept { return clusterings_.empty(); }
  std::size_t m() const noexcept { return clusterings_.size(); }
  const std::vector<std::vector<Vector>>& clusterings() const noexcept { return clusterings_; }

 private:
  std::vector<std::vector<Vector>> clusterings_;
};

// Builds the ensemble over the embeddable members of known_labels. Returns an
// empty ensemble when none is embeddable.
ClusterEnsemble build_label_clusters(const LabelSet& known_labels, const EmbeddingTable& table,
                                     const ScoreConfig& config, Rng& rng);

// 1/2 * sum_i (1 - agg_k cos(y, center_ik)) / m, with agg = min by default.
// An empty ensemble yields 1. Zero-norm centers count as similarity 0.
double semantic_novelty(std::span<const double> label_vector, const ClusterEnsemble& ensemble,
                        SnAggregation aggregation = SnAggregation::kMin);

// Empty optional when the label has no embedding.
std::optional<double> semantic_novelty(std::string_view label, const ClusterEnsemble& ensemble,
                                       const EmbeddingTable& table,
                                       SnAggregation aggregation = SnAggregation::kMin);

// 1 when the mean confidence reaches tau.
int practical_value(std::span<const double> confidences, double tau);
// Mean taken over songs with a document vector.
int practical_value(std::string_view label, const BinaryClassifier& model,
                    std::span<const std::optional<Vector>> docs, const EmbeddingTable& table,
                    double tau);
double mean_confidence(std::span<const double> label_vector, const BinaryClassifier& model,
                       std::span<const std::optional<Vector>> docs);

// 1 when the coefficient of variation (population sigma over mu) of the
// per-song counts reaches tau; 0 when the label never occurs.
int discrimination_ability(std::span<const std::uint32_t> counts_per_song, double tau);
int discrimination_ability(std::string_view label, const CorpusStatistics& stats, double tau);
double coefficient_of_variation(std::string_view label, const CorpusStatistics& stats);

// Product of the enabled factors; disabled factors count as 1.
double combine(const JointScoreBreakdown& parts, const ScoreConfig& config);

// Per-iteration scoring state: frozen model, cluster ensemble, corpus
// statistics, document vectors and a mean-confidence cache.
class JointScorer {
 public:
  JointScorer(const Corpus& corpus, const EmbeddingTable& table, const BinaryClassifier& model,
              std::span<const std::optional<Vector>> docs, ClusterEnsemble ensemble,
              const CorpusStatistics& stats, const ScoreConfig& config);

  // Must run before concurrent use; fills the mean-confidence cache.
  void prepare(const LabelSet& labels);

  // Empty optional for labels without an embedding.
  std::optional<JointScoreBreakdown> score(std::string_view label, const Song& song) const;

 private:
  double cached_mean_confidence(std::string_view label) const;

  const Corpus& corpus_;
  const EmbeddingTable& table_;
  const BinaryClassifier& model_;
  std::span<const std::optional<Vector>> docs_;
  ClusterEnsemble ensemble_;
  const CorpusStatistics& stats_;
  ScoreConfig config_;
  std::vector<Vector> doc_projections_;
  std::unordered_map<std::string, double> mean_confidence_;
};

// Convenience single-call form; builds its own statistics and ensemble.
std::optional<JointScoreBreakdown> joint_score(std::string_view label, const Song& song,
                                               const Corpus& corpus,
                                               const BinaryClassifier& model,
                                               const EmbeddingTable& table,
                                               const LabelSet& known_labels,
                                               const ScoreConfig& config, Rng& rng);

// Top n by j (ties by label), never a candidate with j == 0.
LabelSet select_joint_pseudo_labels(std::span<const JointScoreBreakdown> breakdowns,
                                    std::size_t top_n);
// Every candidate with j > 0 and j >= threshold.
LabelSet select_by_threshold(std::span<const JointScoreBreakdown> breakdowns,
                             double threshold);

}  // namespace diva
