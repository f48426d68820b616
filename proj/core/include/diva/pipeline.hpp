#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "diva/classifier.hpp"
#include "diva/corpus.hpp"
#include "diva/embedding.hpp"
#include "diva/pseudo_labels.hpp"
#include "diva/scoring.hpp"

namespace diva {

// kDiva:       iterate, accumulating classifier and joint-score pseudo-labels.
// kDivaStatic: a single harvesting round from the gold-only model.
// kDivaLight:  iterate, training only on the current round's pseudo-labels.
// kNst:        kDiva without joint-score pseudo-labels (self-training).
// kTfidf:      top_n tokens of each song by TF-IDF; no training.
// kMlc:        fixed-vocabulary multi-label classifier over the gold labels.
enum class Variant { kDiva, kDivaStatic, kDivaLight, kNst, kTfidf, kMlc };

const char* to_string(Variant v);
// Accepts diva, diva_static, diva_light, nst, tfidf, mlc.
Variant parse_variant(std::string_view name);

enum class StoppingRule {
  kPsp,                // training-set PSP stalls for `patience` iterations
  kNewLabelThreshold,  // fewer than min_new_labels new classifier pseudo-labels
};

struct PipelineConfig {
  Variant variant = Variant::kDiva;
  // Fine-tuning rounds after the gold-only iteration 0.
  std::size_t max_iterations = 10;
  std::size_t patience = 1;
  StoppingRule stopping = StoppingRule::kPsp;
  std::size_t min_new_labels = 50;
  // Ranking depth for the training-set PSP/PSnDCG monitor.
  std::size_t eval_k = 5;
  TrainConfig train;
  ScoreConfig score;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  bool dump_scores = false;

  void validate() const;
};

struct IterationRecord {
  std::size_t iteration = 0;
  std::size_t new_classifier = 0;
  std::size_t new_joint = 0;
  std::size_t store_size = 0;
  double train_psp = 0.0;
  double train_psndcg = 0.0;
  double loss_first = 0.0;
  double loss_last = 0.0;
  std::size_t pseudo_dropped = 0;

  bool operator==(const IterationRecord&) const = default;
};

// True once the newest record added no pseudo-labels, or training-set PSP
// has not improved on its best for `patience` consecutive records.
bool stopping_check(std::span<const IterationRecord> history, std::size_t patience);
bool stopping_check(std::span<const IterationRecord> history, const PipelineConfig& config);

enum class PredictionSource { kGold, kClassifier, kTfidf, kMlc };
const char* to_string(PredictionSource s);

struct PredictedLabel {
  Label label;
  double score = 0.0;
  PredictionSource source = PredictionSource::kClassifier;

  bool operator==(const PredictedLabel&) const = default;
};

struct SongPrediction {
  std::string song_id;
  std::vector<PredictedLabel> labels;  // best first

  bool operator==(const SongPrediction&) const = default;
};

struct ScoreDumpEntry {
  std::size_t iteration = 0;
  std::string song_id;
  JointScoreBreakdown breakdown;
};

// Multi-label baseline: sigmoid(W d + b) with one output per gold label.
struct MultiLabelModel {
  std::vector<Label> labels;
  std::size_t dim = 0;
  std::vector<double> weights;  // labels.size() x dim, row-major
  std::vector<double> bias;

  std::vector<double> predict(std::span<const double> doc) const;
};

MultiLabelModel train_multilabel(const Corpus& corpus,
                                 std::span<const std::optional<Vector>> docs, std::size_t dim,
                                 const TrainConfig& config, Rng& rng);

struct RunResult {
  std::optional<BinaryClassifier> model;
  std::optional<MultiLabelModel> multilabel_model;
  std::vector<SongPrediction> predictions;  // corpus order
  std::vector<IterationRecord> history;
  // Store and model as they stood after each recorded iteration.
  std::vector<PseudoLabelStore> store_history;
  std::vector<BinaryClassifier> checkpoints;
  std::vector<ScoreDumpEntry> score_dump;
  std::vector<std::string> skipped_songs;

  const PseudoLabelStore& store() const;
};

// Gold labels first, then every inference candidate reaching the confidence
// threshold, by descending score.
SongPrediction predict_song(const BinaryClassifier& model, const Song& song,
                            const std::optional<Vector>& doc, const LabelSet& gold_vocab,
                            const EmbeddingTable& table, double threshold);

RunResult run(const Corpus& corpus, const EmbeddingTable& table, const PipelineConfig& config);

}  // namespace diva
