#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "diva/corpus.hpp"
#include "diva/embedding.hpp"
#include "diva/pseudo_labels.hpp"
#include "diva/rng.hpp"

namespace diva {

struct TrainConfig {
  double learning_rate = 0.001;
  std::size_t epochs = 5;
  std::size_t batch_size = 16;
  std::size_t negatives_per_positive = 3;
  double subsample_threshold = 1e-3;
  double pseudo_confidence_threshold = 0.9;
  // 0 keeps the affine model; otherwise one tanh hidden layer of this width.
  std::size_t hidden_units = 0;
  std::uint64_t seed = 0;

  void validate() const;
  std::string fingerprint() const;
};

// Scores a (document, label) pair as sigmoid(f(doc ++ label)), with f affine
// or a one-hidden-layer tanh network over the concatenation.
//
// Parameters are stored flat:
//   affine:  [w (2*dim) | bias]
//   hidden:  [W (H x 2*dim, row-major) | b1 (H) | v (H) | bias]
class BinaryClassifier {
 public:
  explicit BinaryClassifier(std::size_t dim, std::size_t hidden_units = 0);

  // Small random weights. The affine model starts at zero.
  static BinaryClassifier initialized(std::size_t dim, std::size_t hidden_units, Rng& rng);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t hidden_units() const noexcept { return hidden_; }
  bool is_affine() const noexcept { return hidden_ == 0; }

  std::span<double> parameters() noexcept { return params_; }
  std::span<const double> parameters() const noexcept { return params_; }

  // Affine model only: the 2*dim weight vector over doc ++ label.
  std::span<const double> weights() const;
  double bias() const noexcept { return params_.back(); }
  void set_bias(double b) noexcept { params_.back() = b; }

  double logit(std::span<const double> doc, std::span<const double> label) const;
  double forward(std::span<const double> doc, std::span<const double> label) const;

  // The logit depends on each side only through these projections, so scoring
  // many labels against many documents can reuse them.
  Vector project_document(std::span<const double> doc) const;
  Vector project_label(std::span<const double> label) const;
  double forward_projected(std::span<const double> doc_proj,
                           std::span<const double> label_proj) const;

  // Adds scale * dBCE/dparams for one pair into grad; returns the pair's loss.
  double accumulate_gradient(std::span<const double> doc, std::span<const double> label,
                             int target, std::span<double> grad, double scale = 1.0) const;

  bool operator==(const BinaryClassifier&) const = default;

 private:
  void check_shapes(std::span<const double> doc, std::span<const double> label) const;

  std::size_t dim_;
  std::size_t hidden_;
  std::vector<double> params_;
};

double sigmoid(double z);

double forward(const BinaryClassifier& model, std::span<const double> doc,
               std::span<const double> label);

// -[t ln c + (1-t) ln(1-c)] with c clamped to [1e-12, 1-1e-12].
double bce_loss(double confidence, int target);

enum class PairOrigin { kGold, kPseudo, kNegative };

struct TrainingPair {
  std::string song_id;
  Label label;
  int target = 1;
  double weight = 1.0;
  PairOrigin origin = PairOrigin::kGold;
};

// k labels drawn uniformly without replacement from pool - exclusions, in
// draw order; everything that remains when fewer than k are available.
std::vector<Label> sample_negatives(const LabelSet& pool, const LabelSet& exclusions,
                                    std::size_t k, Rng& rng);

// Probability of keeping a pseudo-positive whose label has share f among all
// pseudo-positive pairs: min(1, sqrt(t / f)).
double keep_probability(double share, double threshold);

// Drops pseudo-positive pairs by keep_probability; every other pair is kept.
std::vector<TrainingPair> subsample(std::vector<TrainingPair> pairs, double threshold,
                                    Rng& rng);

struct Example {
  std::span<const double> doc;
  std::span<const double> label;
  int target = 0;
};

double summed_loss(const BinaryClassifier& model, std::span<const Example> examples);
std::vector<double> summed_gradient(const BinaryClassifier& model,
                                    std::span<const Example> examples);

// One shuffled pass of mini-batch gradient descent (batch-mean steps).
// Returns the summed loss seen during the pass.
double sgd_epoch(BinaryClassifier& model, std::span<const Example> examples,
                 double learning_rate, std::size_t batch_size, Rng& rng);

// Mean-pooled document vectors per song; songs without any embeddable token
// hold an empty optional.
std::vector<std::optional<Vector>> embed_corpus(const Corpus& corpus,
                                                const EmbeddingTable& table);

struct TrainResult {
  BinaryClassifier model;
  std::vector<double> epoch_losses;
  std::size_t positive_pairs = 0;
  std::size_t pseudo_pairs_kept = 0;
  std::size_t pseudo_pairs_dropped = 0;
  std::vector<std::string> skipped_songs;
};

// Fits on gold labels and stored pseudo-labels as positives plus fresh
// negatives each epoch. Throws TrainingError when there is no positive pair.
TrainResult train(BinaryClassifier model, const Corpus& corpus, const EmbeddingTable& table,
                  const std::vector<std::optional<Vector>>& docs,
                  const PseudoLabelStore& store, const TrainConfig& config, Rng& rng);
TrainResult train(BinaryClassifier model, const Corpus& corpus, const EmbeddingTable& table,
                  const PseudoLabelStore& store, const TrainConfig& config, Rng& rng);

struct ScoredLabel {
  Label label;
  double score = 0.0;

  bool operator==(const ScoredLabel&) const = default;
};

// Candidates whose confidence reaches the threshold, ordered by label.
// Candidates without an embedding are skipped.
std::vector<ScoredLabel> infer_pseudo_labels(const BinaryClassifier& model,
                                             std::span<const double> doc,
                                             const LabelSet& candidates,
                                             const EmbeddingTable& table, double threshold);
std::vector<ScoredLabel> infer_pseudo_labels(const BinaryClassifier& model, const Song& song,
                                             const LabelSet& candidates,
                                             const EmbeddingTable& table, double threshold);

// Text checkpoint, see docs in README. Doubles are written in shortest
// round-trip form, so save/load is lossless.
void save_checkpoint(std::ostream& out, const BinaryClassifier& model,
                     const std::string& config_fingerprint);
struct Checkpoint {
  BinaryClassifier model;
  std::string config_fingerprint;
};
Checkpoint load_checkpoint(std::istream& in, const std::string& source = "<stream>");

}  // namespace diva
