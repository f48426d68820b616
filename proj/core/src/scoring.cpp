#include "diva/scoring.hpp"

#include <algorithm>
#include <cmath>

#include <spdlog/spdlog.h>

#include "diva/error.hpp"
#include "diva/kmeans.hpp"

namespace diva {

void ScoreConfig::validate() const {
  if (m < 1) throw ValidationError("m must be at least 1");
  if (kmeans_iters < 1) throw ValidationError("kmeans_iters must be at least 1");
  if (!(tau > 0.0 && tau < 1.0)) throw ValidationError("tau must lie in (0, 1)");
  if (top_n < 1) throw ValidationError("top_n must be at least 1");
}

CorpusStatistics::CorpusStatistics(const Corpus& corpus) : n_songs_(corpus.n_songs()) {
  for (const Song& song : corpus.songs()) {
    for (const auto& [token, n] : song.token_counts) counts_[token].push_back(n);
  }
}

std::size_t CorpusStatistics::document_frequency(std::string_view token) const {
  return nonzero_counts(token).size();
}

std::span<const std::uint32_t> CorpusStatistics::nonzero_counts(std::string_view token) const {
  auto it = counts_.find(std::string(token));
  if (it == counts_.end()) return {};
  return it->second;
}

double tf_idf(std::string_view label, const Song& song, const CorpusStatistics& stats) {
  const std::uint32_t count = song.count(label);
  const std::size_t df = stats.document_frequency(label);
  if (count == 0 || df == 0 || song.tokens.empty()) return 0.0;
  const double tf = static_cast<double>(count) / static_cast<double>(song.tokens.size());
  return tf * std::log(static_cast<double>(stats.n_songs()) / static_cast<double>(df));
}

double tf_idf(std::string_view label, const Song& song, const Corpus& corpus) {
  return tf_idf(label, song, CorpusStatistics(corpus));
}

ClusterEnsemble ClusterEnsemble::build(std::span<const Vector> points, std::size_t m,
                                       std::size_t k, std::size_t iters, Rng& rng) {
  ClusterEnsemble ensemble;
  if (points.empty()) return ensemble;
  for (std::size_t i = 0; i < m; ++i) {
    ensemble.clusterings_.push_back(kmeans(points, k, iters, rng).centers);
  }
  return ensemble;
}

ClusterEnsemble ClusterEnsemble::from_centers(std::vector<std::vector<Vector>> clusterings) {
  ClusterEnsemble ensemble;
  ensemble.clusterings_ = std::move(clusterings);
  return ensemble;
}

ClusterEnsemble build_label_clusters(const LabelSet& known_labels, const EmbeddingTable& table,
                                     const ScoreConfig& config, Rng& rng) {
  std::vector<Vector> points;
  for (const auto& y : known_labels) {
    if (auto v = table.find(y)) points.emplace_back(v->begin(), v->end());
  }
  if (points.empty()) {
    spdlog::info("no embeddable known labels; semantic novelty defaults to 1");
    return {};
  }
  const std::size_t k =
      config.k ? config.k
               : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(points.size()))));
  return ClusterEnsemble::build(points, config.m, k, config.kmeans_iters, rng);
}

double semantic_novelty(std::span<const double> label_vector, const ClusterEnsemble& ensemble,
                        SnAggregation aggregation) {
  if (ensemble.empty()) return 1.0;
  double total = 0.0;
  for (const auto& centers : ensemble.clusterings()) {
    double agg = aggregation == SnAggregation::kMin ? 1.0 : -1.0;
    for (const auto& c : centers) {
      const double sim = norm(c) == 0.0 ? 0.0 : cosine(label_vector, c);
      agg = aggregation == SnAggregation::kMin ? std::min(agg, sim) : std::max(agg, sim);
    }
    total += (1.0 - agg) / static_cast<double>(ensemble.m());
  }
  return 0.5 * total;
}

std::optional<double> semantic_novelty(std::string_view label, const ClusterEnsemble& ensemble,
                                       const EmbeddingTable& table, SnAggregation aggregation) {
  auto v = table.find(label);
  if (!v) return std::nullopt;
  return semantic_novelty(*v, ensemble, aggregation);
}

int practical_value(std::span<const double> confidences, double tau) {
  if (confidences.empty()) return 0;
  double sum = 0.0;
  for (double c : confidences) sum += c;
  return sum / static_cast<double>(confidences.size()) >= tau ? 1 : 0;
}

double mean_confidence(std::span<const double> label_vector, const BinaryClassifier& model,
                       std::span<const std::optional<Vector>> docs) {
  const Vector label_proj = model.project_label(label_vector);
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& doc : docs) {
    if (!doc) continue;
    sum += model.forward_projected(model.project_document(*doc), label_proj);
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

int practical_value(std::string_view label, const BinaryClassifier& model,
                    std::span<const std::optional<Vector>> docs, const EmbeddingTable& table,
                    double tau) {
  auto v = table.find(label);
  if (!v) return 0;
  return mean_confidence(*v, model, docs) >= tau ? 1 : 0;
}

int discrimination_ability(std::span<const std::uint32_t> counts_per_song, double tau) {
  if (counts_per_song.empty()) return 0;
  double sum = 0.0;
  for (auto c : counts_per_song) sum += c;
  const double n = static_cast<double>(counts_per_song.size());
  const double mu = sum / n;
  if (mu == 0.0) return 0;
  double ss = 0.0;
  for (auto c : counts_per_song) ss += (c - mu) * (c - mu);
  return std::sqrt(ss / n) / mu >= tau ? 1 : 0;
}

double coefficient_of_variation(std::string_view label, const CorpusStatistics& stats) {
  const auto nonzero = stats.nonzero_counts(label);
  if (nonzero.empty() || stats.n_songs() == 0) return 0.0;
  const double n = static_cast<double>(stats.n_songs());
  double sum = 0.0;
  for (auto c : nonzero) sum += c;
  const double mu = sum / n;
  double ss = static_cast<double>(stats.n_songs() - nonzero.size()) * mu * mu;
  for (auto c : nonzero) ss += (c - mu) * (c - mu);
  return std::sqrt(ss / n) / mu;
}

int discrimination_ability(std::string_view label, const CorpusStatistics& stats, double tau) {
  if (stats.document_frequency(label) == 0) return 0;
  return coefficient_of_variation(label, stats) >= tau ? 1 : 0;
}

double combine(const JointScoreBreakdown& parts, const ScoreConfig& config) {
  double j = 1.0;
  if (config.enable_si) j *= parts.si;
  if (config.enable_sn) j *= parts.sn;
  if (config.enable_pv) j *= parts.pv;
  if (config.enable_da) j *= parts.da;
  return j;
}

JointScorer::JointScorer(const Corpus& corpus, const EmbeddingTable& table,
                         const BinaryClassifier& model,
                         std::span<const std::optional<Vector>> docs, ClusterEnsemble ensemble,
                         const CorpusStatistics& stats, const ScoreConfig& config)
    : corpus_(corpus),
      table_(table),
      model_(model),
      docs_(docs),
      ensemble_(std::move(ensemble)),
      stats_(stats),
      config_(config) {
  for (const auto& doc : docs_) {
    if (doc) doc_projections_.push_back(model_.project_document(*doc));
  }
}

void JointScorer::prepare(const LabelSet& labels) {
  for (const auto& y : labels) {
    if (mean_confidence_.contains(y)) continue;
    auto v = table_.find(y);
    if (!v) continue;
    const Vector label_proj = model_.project_label(*v);
    double sum = 0.0;
    for (const auto& dp : doc_projections_) sum += model_.forward_projected(dp, label_proj);
    mean_confidence_.emplace(y, doc_projections_.empty()
                                    ? 0.0
                                    : sum / static_cast<double>(doc_projections_.size()));
  }
}

double JointScorer::cached_mean_confidence(std::string_view label) const {
  auto it = mean_confidence_.find(std::string(label));
  if (it == mean_confidence_.end()) {
    throw InternalError("mean confidence for '" + std::string(label) + "' was not prepared");
  }
  return it->second;
}

std::optional<JointScoreBreakdown> JointScorer::score(std::string_view label,
                                                      const Song& song) const {
  auto v = table_.find(label);
  if (!v) return std::nullopt;
  JointScoreBreakdown b;
  b.label = std::string(label);
  b.si = tf_idf(label, song, stats_);
  b.sn = semantic_novelty(*v, ensemble_, config_.sn_aggregation);
  b.pv = cached_mean_confidence(label) >= config_.tau ? 1 : 0;
  b.da = discrimination_ability(label, stats_, config_.tau);
  b.j = combine(b, config_);
  return b;
}

std::optional<JointScoreBreakdown> joint_score(std::string_view label, const Song& song,
                                               const Corpus& corpus,
                                               const BinaryClassifier& model,
                                               const EmbeddingTable& table,
                                               const LabelSet& known_labels,
                                               const ScoreConfig& config, Rng& rng) {
  const CorpusStatistics stats(corpus);
  const auto docs = embed_corpus(corpus, table);
  JointScorer scorer(corpus, table, model, docs,
                     build_label_clusters(known_labels, table, config, rng), stats, config);
  scorer.prepare(LabelSet{std::string(label)});
  return scorer.score(label, song);
}

namespace {

std::vector<const JointScoreBreakdown*> ranked(std::span<const JointScoreBreakdown> breakdowns) {
  std::vector<const JointScoreBreakdown*> order;
  for (const auto& b : breakdowns) {
    if (b.j > 0.0) order.push_back(&b);
  }
  std::sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
    if (a->j != b->j) return a->j > b->j;
    return a->label < b->label;
  });
  return order;
}

}  // namespace

LabelSet select_joint_pseudo_labels(std::span<const JointScoreBreakdown> breakdowns,
                                    std::size_t top_n) {
  LabelSet out;
  for (const auto* b : ranked(breakdowns)) {
    if (out.size() == top_n) break;
    out.insert(b->label);
  }
  return out;
}

LabelSet select_by_threshold(std::span<const JointScoreBreakdown> breakdowns,
                             double threshold) {
  LabelSet out;
  for (const auto* b : ranked(breakdowns)) {
    if (b->j >= threshold) out.insert(b->label);
  }
  return out;
}

}  // namespace diva
