#include "diva/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include <spdlog/spdlog.h>

#include "diva/error.hpp"
#include "diva/metrics.hpp"
#include "diva/parallel.hpp"

namespace diva {

const char* to_string(Variant v) {
  switch (v) {
    case Variant::kDiva: return "diva";
    case Variant::kDivaStatic: return "diva_static";
    case Variant::kDivaLight: return "diva_light";
    case Variant::kNst: return "nst";
    case Variant::kTfidf: return "tfidf";
    case Variant::kMlc: return "mlc";
  }
  return "diva";
}

Variant parse_variant(std::string_view name) {
  for (Variant v : {Variant::kDiva, Variant::kDivaStatic, Variant::kDivaLight, Variant::kNst,
                    Variant::kTfidf, Variant::kMlc}) {
    if (name == to_string(v)) return v;
  }
  throw ValidationError("unknown variant '" + std::string(name) + "'");
}

const char* to_string(PredictionSource s) {
  switch (s) {
    case PredictionSource::kGold: return "gold";
    case PredictionSource::kClassifier: return "classifier";
    case PredictionSource::kTfidf: return "tfidf";
    case PredictionSource::kMlc: return "mlc";
  }
  return "classifier";
}

void PipelineConfig::validate() const {
  if (patience < 1) throw ValidationError("patience must be at least 1");
  if (eval_k < 1) throw ValidationError("eval_k must be at least 1");
  train.validate();
  score.validate();
}

bool stopping_check(std::span<const IterationRecord> history, std::size_t patience) {
  if (history.empty()) return false;
  const IterationRecord& last = history.back();
  if (last.iteration >= 1 && last.new_classifier + last.new_joint == 0) return true;
  std::size_t best = 0;
  for (std::size_t i = 1; i < history.size(); ++i) {
    if (history[i].train_psp > history[best].train_psp) best = i;
  }
  return history.size() - 1 - best >= patience;
}

bool stopping_check(std::span<const IterationRecord> history, const PipelineConfig& config) {
  if (config.stopping == StoppingRule::kNewLabelThreshold) {
    if (history.empty()) return false;
    const IterationRecord& last = history.back();
    return last.iteration >= 1 && last.new_classifier < config.min_new_labels;
  }
  return stopping_check(history, config.patience);
}

const PseudoLabelStore& RunResult::store() const {
  static const PseudoLabelStore kEmpty;
  return store_history.empty() ? kEmpty : store_history.back();
}

std::vector<double> MultiLabelModel::predict(std::span<const double> doc) const {
  std::vector<double> out(labels.size());
  for (std::size_t l = 0; l < labels.size(); ++l) {
    out[l] = sigmoid(dot(std::span<const double>(weights).subspan(l * dim, dim), doc) + bias[l]);
  }
  return out;
}

MultiLabelModel train_multilabel(const Corpus& corpus,
                                 std::span<const std::optional<Vector>> docs, std::size_t dim,
                                 const TrainConfig& config, Rng& rng) {
  MultiLabelModel model;
  model.labels.assign(corpus.gold_vocab().begin(), corpus.gold_vocab().end());
  model.dim = dim;
  model.weights.assign(model.labels.size() * dim, 0.0);
  model.bias.assign(model.labels.size(), 0.0);
  if (model.labels.empty()) throw TrainingError("no gold labels to train a multi-label model");

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < corpus.n_songs(); ++i) {
    if (docs[i]) order.push_back(i);
  }
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t i : order) {
      const Vector& d = *docs[i];
      const Song& song = corpus.songs()[i];
      const auto probs = model.predict(d);
      for (std::size_t l = 0; l < model.labels.size(); ++l) {
        const double g = probs[l] - (song.gold_labels.contains(model.labels[l]) ? 1.0 : 0.0);
        double* w = model.weights.data() + l * dim;
        for (std::size_t k = 0; k < dim; ++k) w[k] -= config.learning_rate * g * d[k];
        model.bias[l] -= config.learning_rate * g;
      }
    }
  }
  return model;
}

namespace {

std::vector<ScoredLabel> ranked_scores(const BinaryClassifier& model, const Vector& doc,
                                       const LabelSet& candidates, const EmbeddingTable& table) {
  std::vector<ScoredLabel> out;
  const Vector doc_proj = model.project_document(doc);
  for (const auto& y : candidates) {
    if (auto v = table.find(y)) {
      out.push_back({y, model.forward_projected(doc_proj, model.project_label(*v))});
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ScoredLabel& a, const ScoredLabel& b) { return a.score > b.score; });
  return out;
}

struct RankingMonitor {
  double psp = 0.0;
  double psndcg = 0.0;
};

// Top-k ranking of each training song's candidates (gold included) against
// its gold labels.
RankingMonitor training_ranking(const BinaryClassifier& model, const Corpus& corpus,
                                std::span<const std::optional<Vector>> docs,
                                const EmbeddingTable& table, const PropensityModel& propensity,
                                std::size_t k, std::size_t threads) {
  std::vector<std::optional<std::pair<double, double>>> per_song(corpus.n_songs());
  parallel_for(corpus.n_songs(), threads, [&](std::size_t i) {
    const Song& song = corpus.songs()[i];
    if (!docs[i] || song.gold_labels.empty()) return;
    LabelSet candidates = inference_candidates(song, corpus.gold_vocab());
    candidates.insert(song.gold_labels.begin(), song.gold_labels.end());
    auto scored = ranked_scores(model, *docs[i], candidates, table);
    if (scored.size() > k) scored.resize(k);
    std::vector<Label> ranking;
    for (auto& s : scored) ranking.push_back(std::move(s.label));
    const auto p = propensity.table(song.gold_labels);
    per_song[i] = {psp(ranking, song.gold_labels, p), psndcg(ranking, song.gold_labels, p)};
  });
  RankingMonitor out;
  std::size_t n = 0;
  for (const auto& s : per_song) {
    if (!s) continue;
    out.psp += s->first;
    out.psndcg += s->second;
    ++n;
  }
  if (n) {
    out.psp /= static_cast<double>(n);
    out.psndcg /= static_cast<double>(n);
  }
  return out;
}

struct Harvest {
  std::vector<ScoredLabel> classifier;
  std::vector<JointScoreBreakdown> joint_selected;
  std::vector<JointScoreBreakdown> joint_all;
};

std::vector<SongPrediction> tfidf_predictions(const Corpus& corpus, std::size_t top_n) {
  const CorpusStatistics stats(corpus);
  std::vector<SongPrediction> out;
  for (const Song& song : corpus.songs()) {
    std::vector<ScoredLabel> scored;
    for (const auto& [token, n] : song.token_counts) {
      const double si = tf_idf(token, song, stats);
      if (si > 0.0) scored.push_back({token, si});
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.score > b.score; });
    if (scored.size() > top_n) scored.resize(top_n);
    SongPrediction p{song.id, {}};
    for (auto& s : scored) {
      p.labels.push_back({std::move(s.label), s.score, PredictionSource::kTfidf});
    }
    out.push_back(std::move(p));
  }
  return out;
}

void add_gold(SongPrediction& p, const Song& song) {
  for (const auto& y : song.gold_labels) p.labels.push_back({y, 1.0, PredictionSource::kGold});
}

}  // namespace

SongPrediction predict_song(const BinaryClassifier& model, const Song& song,
                            const std::optional<Vector>& doc, const LabelSet& gold_vocab,
                            const EmbeddingTable& table, double threshold) {
  SongPrediction p{song.id, {}};
  add_gold(p, song);
  if (!doc) return p;
  for (auto& s : ranked_scores(model, *doc, inference_candidates(song, gold_vocab), table)) {
    if (s.score < threshold) break;
    p.labels.push_back({std::move(s.label), s.score, PredictionSource::kClassifier});
  }
  return p;
}

RunResult run(const Corpus& corpus, const EmbeddingTable& table, const PipelineConfig& config) {
  config.validate();
  RunResult result;
  const Rng root(config.seed);

  if (config.variant == Variant::kTfidf) {
    result.predictions = tfidf_predictions(corpus, config.score.top_n);
    return result;
  }

  const auto docs = embed_corpus(corpus, table);
  for (std::size_t i = 0; i < corpus.n_songs(); ++i) {
    if (!docs[i]) result.skipped_songs.push_back(corpus.songs()[i].id);
  }

  if (config.variant == Variant::kMlc) {
    Rng rng = root.derive("mlc");
    result.multilabel_model = train_multilabel(corpus, docs, table.dim(), config.train, rng);
    const auto& mlc = *result.multilabel_model;
    for (std::size_t i = 0; i < corpus.n_songs(); ++i) {
      const Song& song = corpus.songs()[i];
      SongPrediction p{song.id, {}};
      add_gold(p, song);
      if (docs[i]) {
        const auto probs = mlc.predict(*docs[i]);
        std::vector<ScoredLabel> scored;
        for (std::size_t l = 0; l < mlc.labels.size(); ++l) {
          if (probs[l] >= 0.5 && !song.gold_labels.contains(mlc.labels[l])) {
            scored.push_back({mlc.labels[l], probs[l]});
          }
        }
        std::stable_sort(scored.begin(), scored.end(),
                         [](const auto& a, const auto& b) { return a.score > b.score; });
        for (auto& s : scored) {
          p.labels.push_back({std::move(s.label), s.score, PredictionSource::kMlc});
        }
      }
      result.predictions.push_back(std::move(p));
    }
    return result;
  }

  const bool joint_enabled = config.variant != Variant::kNst;
  const bool accumulate = config.variant != Variant::kDivaLight;
  const std::size_t last_iteration = config.variant == Variant::kDivaStatic
                                         ? std::min<std::size_t>(1, config.max_iterations)
                                         : config.max_iterations;
  const double theta = config.train.pseudo_confidence_threshold;
  const CorpusStatistics stats(corpus);
  const PropensityModel propensities(corpus);

  Rng init_rng = root.derive("init");
  BinaryClassifier model =
      BinaryClassifier::initialized(table.dim(), config.train.hidden_units, init_rng);
  PseudoLabelStore store;

  for (std::size_t it = 0; it <= last_iteration; ++it) {
    IterationRecord record;
    record.iteration = it;

    if (it > 0) {
      std::optional<JointScorer> scorer;
      if (joint_enabled) {
        LabelSet known = corpus.gold_vocab();
        for (const auto& [id, entries] : store.songs()) {
          for (const auto& [y, e] : entries) known.insert(y);
        }
        Rng cluster_rng = root.derive("clusters", it);
        scorer.emplace(corpus, table, model, docs,
                       build_label_clusters(known, table, config.score, cluster_rng), stats,
                       config.score);
        LabelSet all_tokens;
        for (const Song& song : corpus.songs()) {
          for (const auto& [token, n] : song.token_counts) all_tokens.insert(token);
        }
        scorer->prepare(all_tokens);
        scorer->prepare(corpus.gold_vocab());
      }

      std::vector<Harvest> harvest(corpus.n_songs());
      parallel_for(corpus.n_songs(), config.threads, [&](std::size_t i) {
        const Song& song = corpus.songs()[i];
        if (!docs[i]) return;
        const LabelSet candidates = inference_candidates(song, corpus.gold_vocab());
        Harvest& h = harvest[i];
        h.classifier = infer_pseudo_labels(model, *docs[i], candidates, table, theta);
        if (!scorer) return;
        LabelSet remaining = candidates;
        for (const auto& s : h.classifier) remaining.erase(s.label);
        if (accumulate) {
          for (const auto& [y, e] : store.entries(song.id)) remaining.erase(y);
        }
        for (const auto& y : remaining) {
          if (auto b = scorer->score(y, song)) h.joint_all.push_back(std::move(*b));
        }
        const LabelSet chosen =
            config.score.global_threshold
                ? select_by_threshold(h.joint_all, *config.score.global_threshold)
                : select_joint_pseudo_labels(h.joint_all, config.score.top_n);
        for (const auto& b : h.joint_all) {
          if (chosen.contains(b.label)) h.joint_selected.push_back(b);
        }
      });

      PseudoLabelStore next = accumulate ? store : PseudoLabelStore{};
      for (std::size_t i = 0; i < corpus.n_songs(); ++i) {
        const std::string& id = corpus.songs()[i].id;
        for (const auto& s : harvest[i].classifier) {
          next.add(id, s.label, {PseudoSource::kClassifier, static_cast<int>(it), s.score});
          if (!store.contains(id, s.label)) ++record.new_classifier;
        }
        for (const auto& b : harvest[i].joint_selected) {
          next.add(id, b.label, {PseudoSource::kJoint, static_cast<int>(it), b.j});
          if (!store.contains(id, b.label)) ++record.new_joint;
        }
        if (config.dump_scores) {
          for (const auto& b : harvest[i].joint_all) result.score_dump.push_back({it, id, b});
        }
      }
      store = std::move(next);
    }

    Rng train_rng = root.derive("train", it);
    TrainResult trained = train(std::move(model), corpus, table, docs, store, config.train,
                                train_rng);
    model = std::move(trained.model);
    record.store_size = store.size();
    record.pseudo_dropped = trained.pseudo_pairs_dropped;
    record.loss_first = trained.epoch_losses.front();
    record.loss_last = trained.epoch_losses.back();
    const auto monitor = training_ranking(model, corpus, docs, table, propensities,
                                          config.eval_k, config.threads);
    record.train_psp = monitor.psp;
    record.train_psndcg = monitor.psndcg;
    spdlog::info("iteration {}: +{} classifier, +{} joint, store {}, train PSP {:.4f}", it,
                 record.new_classifier, record.new_joint, record.store_size, record.train_psp);

    result.history.push_back(record);
    result.store_history.push_back(store);
    result.checkpoints.push_back(model);
    if (it > 0 && stopping_check(result.history, config)) break;
  }

  std::vector<SongPrediction> predictions(corpus.n_songs());
  parallel_for(corpus.n_songs(), config.threads, [&](std::size_t i) {
    predictions[i] =
        predict_song(model, corpus.songs()[i], docs[i], corpus.gold_vocab(), table, theta);
  });
  result.predictions = std::move(predictions);
  result.model = std::move(model);
  return result;
}

}  // namespace diva
