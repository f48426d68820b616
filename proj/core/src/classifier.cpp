#include "diva/classifier.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "diva/error.hpp"

namespace diva {

namespace {

constexpr double kProbabilityClamp = 1e-12;

std::string shortest(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw ValidationError("learning_rate must be non-negative");
  if (epochs < 1) throw ValidationError("epochs must be at least 1");
  if (batch_size < 1) throw ValidationError("batch_size must be at least 1");
  if (negatives_per_positive < 1) throw ValidationError("negatives_per_positive must be >= 1");
  if (!(subsample_threshold > 0.0)) throw ValidationError("subsample_threshold must be > 0");
  if (!(pseudo_confidence_threshold > 0.0 && pseudo_confidence_threshold < 1.0)) {
    throw ValidationError("pseudo_confidence_threshold must lie in (0, 1)");
  }
}

std::string TrainConfig::fingerprint() const {
  std::ostringstream s;
  s << "lr=" << shortest(learning_rate) << ";epochs=" << epochs << ";batch=" << batch_size
    << ";k=" << negatives_per_positive << ";t=" << shortest(subsample_threshold)
    << ";theta=" << shortest(pseudo_confidence_threshold) << ";hidden=" << hidden_units
    << ";seed=" << seed;
  const std::uint64_t h = fnv1a64(s.str());
  std::ostringstream hex;
  hex << std::hex << h;
  return hex.str();
}

BinaryClassifier::BinaryClassifier(std::size_t dim, std::size_t hidden_units)
    : dim_(dim), hidden_(hidden_units) {
  if (dim == 0) throw ValidationError("classifier dimension must be positive");
  const std::size_t n = hidden_ == 0 ? 2 * dim_ + 1 : hidden_ * 2 * dim_ + 2 * hidden_ + 1;
  params_.assign(n, 0.0);
}

BinaryClassifier BinaryClassifier::initialized(std::size_t dim, std::size_t hidden_units,
                                               Rng& rng) {
  BinaryClassifier model(dim, hidden_units);
  if (model.is_affine()) return model;
  const std::size_t in = 2 * dim;
  const double w_scale = 1.0 / std::sqrt(static_cast<double>(in));
  const double v_scale = 1.0 / std::sqrt(static_cast<double>(hidden_units));
  auto p = model.parameters();
  for (std::size_t i = 0; i < hidden_units * in; ++i) p[i] = w_scale * rng.normal();
  const std::size_t v0 = hidden_units * in + hidden_units;
  for (std::size_t j = 0; j < hidden_units; ++j) p[v0 + j] = v_scale * rng.normal();
  return model;
}

std::span<const double> BinaryClassifier::weights() const {
  if (!is_affine()) throw ValidationError("weights() is defined for the affine model only");
  return std::span<const double>(params_).first(2 * dim_);
}

void BinaryClassifier::check_shapes(std::span<const double> doc,
                                    std::span<const double> label) const {
  if (doc.size() != dim_ || label.size() != dim_) {
    throw ShapeError("classifier expects vectors of length " + std::to_string(dim_) +
                     ", got " + std::to_string(doc.size()) + " and " +
                     std::to_string(label.size()));
  }
}

Vector BinaryClassifier::project_document(std::span<const double> doc) const {
  if (doc.size() != dim_) throw ShapeError("document vector has the wrong length");
  const std::size_t rows = is_affine() ? 1 : hidden_;
  const std::size_t stride = 2 * dim_;
  Vector out(rows, 0.0);
  for (std::size_t j = 0; j < rows; ++j) {
    const double* w = params_.data() + j * stride;
    double s = 0.0;
    for (std::size_t k = 0; k < dim_; ++k) s += w[k] * doc[k];
    out[j] = s;
  }
  return out;
}

Vector BinaryClassifier::project_label(std::span<const double> label) const {
  if (label.size() != dim_) throw ShapeError("label vector has the wrong length");
  const std::size_t rows = is_affine() ? 1 : hidden_;
  const std::size_t stride = 2 * dim_;
  Vector out(rows, 0.0);
  for (std::size_t j = 0; j < rows; ++j) {
    const double* w = params_.data() + j * stride + dim_;
    double s = 0.0;
    for (std::size_t k = 0; k < dim_; ++k) s += w[k] * label[k];
    out[j] = s;
  }
  return out;
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double BinaryClassifier::forward_projected(std::span<const double> doc_proj,
                                           std::span<const double> label_proj) const {
  if (is_affine()) return sigmoid(doc_proj[0] + label_proj[0] + params_.back());
  const std::size_t b1 = hidden_ * 2 * dim_;
  const std::size_t v0 = b1 + hidden_;
  double z = params_.back();
  for (std::size_t j = 0; j < hidden_; ++j) {
    z += params_[v0 + j] * std::tanh(doc_proj[j] + label_proj[j] + params_[b1 + j]);
  }
  return sigmoid(z);
}

double BinaryClassifier::logit(std::span<const double> doc,
                               std::span<const double> label) const {
  check_shapes(doc, label);
  const std::size_t stride = 2 * dim_;
  auto row = [&](std::size_t j) {
    const double* w = params_.data() + j * stride;
    double s = 0.0;
    for (std::size_t k = 0; k < dim_; ++k) s += w[k] * doc[k] + w[dim_ + k] * label[k];
    return s;
  };
  if (is_affine()) return row(0) + params_.back();
  const std::size_t b1 = hidden_ * stride;
  const std::size_t v0 = b1 + hidden_;
  double z = params_.back();
  for (std::size_t j = 0; j < hidden_; ++j) {
    z += params_[v0 + j] * std::tanh(row(j) + params_[b1 + j]);
  }
  return z;
}

double BinaryClassifier::forward(std::span<const double> doc,
                                 std::span<const double> label) const {
  return sigmoid(logit(doc, label));
}

double BinaryClassifier::accumulate_gradient(std::span<const double> doc,
                                             std::span<const double> label, int target,
                                             std::span<double> grad, double scale) const {
  check_shapes(doc, label);
  const std::size_t stride = 2 * dim_;
  const double t = static_cast<double>(target);
  if (is_affine()) {
    const double c = forward(doc, label);
    const double dz = scale * (c - t);
    for (std::size_t k = 0; k < dim_; ++k) {
      grad[k] += dz * doc[k];
      grad[dim_ + k] += dz * label[k];
    }
    grad.back() += dz;
    return bce_loss(c, target);
  }
  const std::size_t b1 = hidden_ * stride;
  const std::size_t v0 = b1 + hidden_;
  std::vector<double> h(hidden_);
  double z = params_.back();
  for (std::size_t j = 0; j < hidden_; ++j) {
    const double* w = params_.data() + j * stride;
    double s = params_[b1 + j];
    for (std::size_t k = 0; k < dim_; ++k) s += w[k] * doc[k] + w[dim_ + k] * label[k];
    h[j] = std::tanh(s);
    z += params_[v0 + j] * h[j];
  }
  const double c = sigmoid(z);
  const double dz = scale * (c - t);
  grad.back() += dz;
  for (std::size_t j = 0; j < hidden_; ++j) {
    grad[v0 + j] += dz * h[j];
    const double ds = dz * params_[v0 + j] * (1.0 - h[j] * h[j]);
    grad[b1 + j] += ds;
    double* g = grad.data() + j * stride;
    for (std::size_t k = 0; k < dim_; ++k) {
      g[k] += ds * doc[k];
      g[dim_ + k] += ds * label[k];
    }
  }
  return bce_loss(c, target);
}

double forward(const BinaryClassifier& model, std::span<const double> doc,
               std::span<const double> label) {
  return model.forward(doc, label);
}

double bce_loss(double confidence, int target) {
  const double c = std::clamp(confidence, kProbabilityClamp, 1.0 - kProbabilityClamp);
  return target == 1 ? -std::log(c) : -std::log(1.0 - c);
}

std::vector<Label> sample_negatives(const LabelSet& pool, const LabelSet& exclusions,
                                    std::size_t k, Rng& rng) {
  std::vector<const Label*> effective;
  for (const auto& y : pool) {
    if (!exclusions.contains(y)) effective.push_back(&y);
  }
  std::vector<Label> out;
  if (effective.empty()) return out;
  for (std::size_t i : rng.sample_indices(effective.size(), k)) out.push_back(*effective[i]);
  return out;
}

double keep_probability(double share, double threshold) {
  if (share <= threshold) return 1.0;
  return std::min(1.0, std::sqrt(threshold / share));
}

std::vector<TrainingPair> subsample(std::vector<TrainingPair> pairs, double threshold,
                                    Rng& rng) {
  if (!(threshold > 0.0)) throw ValidationError("subsample threshold must be positive");
  std::unordered_map<std::string, std::size_t> counts;
  std::size_t total = 0;
  for (const auto& p : pairs) {
    if (p.origin == PairOrigin::kPseudo && p.target == 1) {
      ++counts[p.label];
      ++total;
    }
  }
  std::vector<TrainingPair> kept;
  kept.reserve(pairs.size());
  for (auto& p : pairs) {
    if (p.origin == PairOrigin::kPseudo && p.target == 1) {
      const double share = static_cast<double>(counts[p.label]) / static_cast<double>(total);
      if (rng.uniform() >= keep_probability(share, threshold)) continue;
    }
    kept.push_back(std::move(p));
  }
  return kept;
}

double summed_loss(const BinaryClassifier& model, std::span<const Example> examples) {
  double loss = 0.0;
  for (const auto& e : examples) loss += bce_loss(model.forward(e.doc, e.label), e.target);
  return loss;
}

std::vector<double> summed_gradient(const BinaryClassifier& model,
                                    std::span<const Example> examples) {
  std::vector<double> grad(model.parameters().size(), 0.0);
  for (const auto& e : examples) model.accumulate_gradient(e.doc, e.label, e.target, grad);
  return grad;
}

double sgd_epoch(BinaryClassifier& model, std::span<const Example> examples,
                 double learning_rate, std::size_t batch_size, Rng& rng) {
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  std::vector<double> grad(model.parameters().size());
  double loss = 0.0;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + batch_size);
    std::fill(grad.begin(), grad.end(), 0.0);
    const double scale = 1.0 / static_cast<double>(end - start);
    for (std::size_t i = start; i < end; ++i) {
      const Example& e = examples[order[i]];
      loss += model.accumulate_gradient(e.doc, e.label, e.target, grad, scale);
    }
    auto p = model.parameters();
    for (std::size_t k = 0; k < p.size(); ++k) p[k] -= learning_rate * grad[k];
  }
  return loss;
}

std::vector<std::optional<Vector>> embed_corpus(const Corpus& corpus,
                                                const EmbeddingTable& table) {
  std::vector<std::optional<Vector>> docs;
  docs.reserve(corpus.n_songs());
  for (const Song& song : corpus.songs()) {
    try {
      docs.emplace_back(embed_document(song, table));
    } catch (const EmptyDocumentError&) {
      spdlog::warn("song '{}' has no embeddable tokens; skipped", song.id);
      docs.emplace_back(std::nullopt);
    }
  }
  return docs;
}

TrainResult train(BinaryClassifier model, const Corpus& corpus, const EmbeddingTable& table,
                  const std::vector<std::optional<Vector>>& docs,
                  const PseudoLabelStore& store, const TrainConfig& config, Rng& rng) {
  config.validate();
  if (model.dim() != table.dim()) {
    throw ShapeError("classifier dimension " + std::to_string(model.dim()) +
                     " does not match embedding dimension " + std::to_string(table.dim()));
  }
  TrainResult result{std::move(model), {}, 0, 0, 0, {}};

  std::vector<TrainingPair> positives;
  for (std::size_t i = 0; i < corpus.n_songs(); ++i) {
    const Song& song = corpus.songs()[i];
    if (!docs[i]) {
      result.skipped_songs.push_back(song.id);
      continue;
    }
    for (const auto& y : song.gold_labels) {
      if (table.contains(y)) positives.push_back({song.id, y, 1, 1.0, PairOrigin::kGold});
    }
    for (const auto& [y, entry] : store.entries(song.id)) {
      if (table.contains(y)) positives.push_back({song.id, y, 1, 1.0, PairOrigin::kPseudo});
    }
  }
  const std::size_t pseudo_before = static_cast<std::size_t>(std::count_if(
      positives.begin(), positives.end(),
      [](const TrainingPair& p) { return p.origin == PairOrigin::kPseudo; }));
  positives = subsample(std::move(positives), config.subsample_threshold, rng);
  result.positive_pairs = positives.size();
  result.pseudo_pairs_kept = static_cast<std::size_t>(std::count_if(
      positives.begin(), positives.end(),
      [](const TrainingPair& p) { return p.origin == PairOrigin::kPseudo; }));
  result.pseudo_pairs_dropped = pseudo_before - result.pseudo_pairs_kept;
  if (positives.empty()) throw TrainingError("no positive training pairs");

  // Per-song positive counts, negative pools and exclusions.
  struct SongPlan {
    std::size_t index;
    std::size_t positives = 0;
    LabelSet pool;
    LabelSet exclusions;
  };
  std::vector<SongPlan> plans;
  std::unordered_map<std::string, std::size_t> plan_of;
  for (const auto& p : positives) {
    auto [it, fresh] = plan_of.emplace(p.song_id, plans.size());
    if (fresh) {
      const std::size_t index = *corpus.find(p.song_id);
      const Song& song = corpus.songs()[index];
      SongPlan plan{index, 0, {}, song.gold_labels};
      for (const auto& [y, e] : store.entries(song.id)) plan.exclusions.insert(y);
      for (const auto& y : training_candidates(song)) {
        if (table.contains(y)) plan.pool.insert(y);
      }
      plans.push_back(std::move(plan));
    }
    ++plans[it->second].positives;
  }

  std::vector<Example> examples;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    examples.clear();
    for (const auto& p : positives) {
      const std::size_t index = plans[plan_of[p.song_id]].index;
      examples.push_back({*docs[index], *table.find(p.label), 1});
    }
    for (const auto& plan : plans) {
      const auto negatives = sample_negatives(
          plan.pool, plan.exclusions, config.negatives_per_positive * plan.positives, rng);
      if (negatives.empty()) {
        spdlog::debug("song '{}' has no negative candidates",
                      corpus.songs()[plan.index].id);
      }
      for (const auto& y : negatives) examples.push_back({*docs[plan.index], *table.find(y), 0});
    }
    result.epoch_losses.push_back(
        sgd_epoch(result.model, examples, config.learning_rate, config.batch_size, rng));
  }
  return result;
}

TrainResult train(BinaryClassifier model, const Corpus& corpus, const EmbeddingTable& table,
                  const PseudoLabelStore& store, const TrainConfig& config, Rng& rng) {
  return train(std::move(model), corpus, table, embed_corpus(corpus, table), store, config,
               rng);
}

std::vector<ScoredLabel> infer_pseudo_labels(const BinaryClassifier& model,
                                             std::span<const double> doc,
                                             const LabelSet& candidates,
                                             const EmbeddingTable& table, double threshold) {
  std::vector<ScoredLabel> out;
  if (candidates.empty()) return out;
  const Vector doc_proj = model.project_document(doc);
  for (const auto& y : candidates) {
    auto v = table.find(y);
    if (!v) continue;
    const double c = model.forward_projected(doc_proj, model.project_label(*v));
    if (c >= threshold) out.push_back({y, c});
  }
  return out;
}

std::vector<ScoredLabel> infer_pseudo_labels(const BinaryClassifier& model, const Song& song,
                                             const LabelSet& candidates,
                                             const EmbeddingTable& table, double threshold) {
  Vector doc;
  try {
    doc = embed_document(song, table);
  } catch (const EmptyDocumentError&) {
    spdlog::warn("song '{}' has no embeddable tokens; no pseudo-labels inferred", song.id);
    return {};
  }
  return infer_pseudo_labels(model, doc, candidates, table, threshold);
}

void save_checkpoint(std::ostream& out, const BinaryClassifier& model,
                     const std::string& config_fingerprint) {
  out << "diva-checkpoint 1\n";
  out << "dim " << model.dim() << '\n';
  out << "hidden " << model.hidden_units() << '\n';
  out << "config " << (config_fingerprint.empty() ? "-" : config_fingerprint) << '\n';
  out << "params " << model.parameters().size() << '\n';
  for (double p : model.parameters()) out << shortest(p) << '\n';
}

Checkpoint load_checkpoint(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  auto next = [&](const char* key) {
    if (!std::getline(in, line)) throw ParseError(source, line_no + 1, "truncated checkpoint");
    ++line_no;
    const std::string prefix = std::string(key) + " ";
    if (line.rfind(prefix, 0) != 0) {
      throw ParseError(source, line_no, std::string("expected '") + key + "'");
    }
    return line.substr(prefix.size());
  };
  auto to_size = [&](const std::string& s) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw ParseError(source, line_no, "invalid integer '" + s + "'");
    }
    return v;
  };
  if (next("diva-checkpoint") != "1") {
    throw ParseError(source, line_no, "unsupported checkpoint version");
  }
  const std::size_t dim = to_size(next("dim"));
  const std::size_t hidden = to_size(next("hidden"));
  std::string fingerprint = next("config");
  if (fingerprint == "-") fingerprint.clear();
  const std::size_t n = to_size(next("params"));
  BinaryClassifier model(dim, hidden);
  if (n != model.parameters().size()) {
    throw ParseError(source, line_no, "parameter count does not match dim/hidden");
  }
  for (double& p : model.parameters()) {
    if (!std::getline(in, line)) throw ParseError(source, line_no + 1, "truncated checkpoint");
    ++line_no;
    auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), p);
    if (ec != std::errc() || ptr != line.data() + line.size() || !std::isfinite(p)) {
      throw ParseError(source, line_no, "invalid parameter '" + line + "'");
    }
  }
  return {std::move(model), std::move(fingerprint)};
}

}  // namespace diva
