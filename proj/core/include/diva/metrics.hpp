#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "diva/corpus.hpp"
#include "diva/embedding.hpp"

namespace diva {

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

double harmonic_mean(double a, double b);

// Empty prediction or reference gives 0 for the affected ratio.
PrecisionRecall prf1(const LabelSet& pred, const LabelSet& ref);

// Binary-relevance nDCG with log2 discounts; the ideal ranking places
// min(|pred|, |ref|) relevant labels first. Throws ValidationError on a
// duplicate in the ranking.
double ndcg(std::span<const Label> ranked, const LabelSet& ref);

inline constexpr double kPropensityA = 0.55;
inline constexpr double kPropensityB = 1.5;

// 1 / (1 + (ln N - 1)(b + 1)^a e^{-a ln(N prior + b)}), capped at 1 for
// corpora so small that ln N < 1 pushes the raw value above 1.
double propensity(double prior, std::size_t n, double a = kPropensityA,
                  double b = kPropensityB);

// Label priors measured on gold annotations.
class PropensityModel {
 public:
  explicit PropensityModel(const Corpus& corpus, double a = kPropensityA,
                           double b = kPropensityB);

  double prior(std::string_view label) const;
  double propensity(std::string_view label) const;
  std::size_t n() const noexcept { return n_; }
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }

  // Propensities for every label in the given sets.
  std::unordered_map<std::string, double> table(const LabelSet& labels) const;

 private:
  std::size_t n_;
  double a_, b_;
  std::unordered_map<std::string, std::size_t> gold_counts_;
};

using PropensityTable = std::unordered_map<std::string, double>;

// Propensity-weighted hits in the ranking, divided by the best weight any
// ranking of the same length could collect from ref. Every ref label needs a
// propensity; a missing one raises ValidationError naming it.
double psp(std::span<const Label> ranked, const LabelSet& ref, const PropensityTable& p);
double psndcg(std::span<const Label> ranked, const LabelSet& ref, const PropensityTable& p);

struct SoftScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Mean best cosine of each predicted label against ref (and vice versa),
// negatives floored at 0. Throws ValidationError naming any label without an
// embedding.
SoftScores soft_scores(const LabelSet& pred, const LabelSet& ref, const EmbeddingTable& table);
double soft_precision(const LabelSet& pred, const LabelSet& ref, const EmbeddingTable& table);
double soft_recall(const LabelSet& pred, const LabelSet& ref, const EmbeddingTable& table);
double soft_f1(const LabelSet& pred, const LabelSet& ref, const EmbeddingTable& table);

// Jaccard similarity. Throws ValidationError when complete is empty.
double coverage(const LabelSet& pred, const LabelSet& complete);

enum class TestSet { kGold, kComplete };

struct MetricsReport {
  std::optional<double> precision, recall, f1, ndcg, psp, psndcg;
  std::optional<double> soft_precision, soft_recall, soft_f1, coverage;
  std::size_t n_songs = 0;
};

struct SongMetrics {
  std::string song_id;
  MetricsReport metrics;
};

struct RankedPrediction {
  std::string song_id;
  std::vector<Label> labels;  // best first
};

struct Evaluation {
  MetricsReport summary;
  std::vector<SongMetrics> per_song;
  std::vector<std::string> conventions;
};

// Scores each prediction against its song's gold (test-1 style) or complete
// (test-2 style) labels and averages in corpus order. Soft metrics need a
// table; PSP/PSnDCG are not applicable against complete sets.
Evaluation evaluate(std::span<const RankedPrediction> predictions, const Corpus& corpus,
                    TestSet test_set, const EmbeddingTable* table = nullptr);

}  // namespace diva
