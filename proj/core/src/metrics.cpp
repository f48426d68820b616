#include "diva/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "diva/error.hpp"

namespace diva {

namespace {

std::size_t intersection_size(const LabelSet& a, const LabelSet& b) {
  std::size_t n = 0;
  for (const auto& y : a) n += b.contains(y);
  return n;
}

void require_unique(std::span<const Label> ranked) {
  LabelSet seen;
  for (const auto& y : ranked) {
    if (!seen.insert(y).second) {
      throw ValidationError("label '" + y + "' appears twice in a ranking");
    }
  }
}

double discount(std::size_t rank) { return 1.0 / std::log2(static_cast<double>(rank) + 2.0); }

double weight_of(const Label& y, const PropensityTable& p) {
  auto it = p.find(y);
  if (it == p.end()) throw ValidationError("no propensity for label '" + y + "'");
  return 1.0 / it->second;
}

// Reference weights, largest first.
std::vector<double> sorted_weights(const LabelSet& ref, const PropensityTable& p) {
  std::vector<double> w;
  for (const auto& y : ref) w.push_back(weight_of(y, p));
  std::sort(w.begin(), w.end(), std::greater<>());
  return w;
}

}  // namespace

double harmonic_mean(double a, double b) { return a + b > 0.0 ? 2.0 * a * b / (a + b) : 0.0; }

PrecisionRecall prf1(const LabelSet& pred, const LabelSet& ref) {
  const double hits = static_cast<double>(intersection_size(pred, ref));
  PrecisionRecall out;
  out.precision = pred.empty() ? 0.0 : hits / static_cast<double>(pred.size());
  out.recall = ref.empty() ? 0.0 : hits / static_cast<double>(ref.size());
  out.f1 = harmonic_mean(out.precision, out.recall);
  return out;
}

double ndcg(std::span<const Label> ranked, const LabelSet& ref) {
  require_unique(ranked);
  if (ref.empty() || ranked.empty()) return 0.0;
  double dcg = 0.0;
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    if (ref.contains(ranked[r])) dcg += discount(r);
  }
  double ideal = 0.0;
  for (std::size_t r = 0; r < std::min(ranked.size(), ref.size()); ++r) ideal += discount(r);
  return dcg / ideal;
}

double propensity(double prior, std::size_t n, double a, double b) {
  const double big_n = static_cast<double>(n);
  const double c = (std::log(big_n) - 1.0) * std::pow(b + 1.0, a);
  const double p = 1.0 / (1.0 + c * std::exp(-a * std::log(big_n * prior + b)));
  return (p > 1.0 || p <= 0.0) ? 1.0 : p;
}

PropensityModel::PropensityModel(const Corpus& corpus, double a, double b)
    : n_(corpus.n_songs()), a_(a), b_(b) {
  for (const Song& song : corpus.songs()) {
    for (const auto& y : song.gold_labels) ++gold_counts_[y];
  }
}

double PropensityModel::prior(std::string_view label) const {
  if (n_ == 0) return 0.0;
  auto it = gold_counts_.find(std::string(label));
  const double count = it == gold_counts_.end() ? 0.0 : static_cast<double>(it->second);
  return count / static_cast<double>(n_);
}

double PropensityModel::propensity(std::string_view label) const {
  return diva::propensity(prior(label), std::max<std::size_t>(n_, 1), a_, b_);
}

PropensityTable PropensityModel::table(const LabelSet& labels) const {
  PropensityTable out;
  for (const auto& y : labels) out.emplace(y, propensity(y));
  return out;
}

double psp(std::span<const Label> ranked, const LabelSet& ref, const PropensityTable& p) {
  require_unique(ranked);
  const std::vector<double> best = sorted_weights(ref, p);
  double gained = 0.0;
  for (const auto& y : ranked) {
    if (ref.contains(y)) gained += weight_of(y, p);
  }
  double attainable = 0.0;
  for (std::size_t r = 0; r < std::min(ranked.size(), best.size()); ++r) attainable += best[r];
  return attainable > 0.0 ? gained / attainable : 0.0;
}

double psndcg(std::span<const Label> ranked, const LabelSet& ref, const PropensityTable& p) {
  require_unique(ranked);
  const std::vector<double> best = sorted_weights(ref, p);
  double dcg = 0.0;
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    if (ref.contains(ranked[r])) dcg += weight_of(ranked[r], p) * discount(r);
  }
  double ideal = 0.0;
  for (std::size_t r = 0; r < std::min(ranked.size(), best.size()); ++r) {
    ideal += best[r] * discount(r);
  }
  return ideal > 0.0 ? dcg / ideal : 0.0;
}

namespace {

std::span<const double> vector_of(const Label& y, const EmbeddingTable& table) {
  auto v = table.find(y);
  if (!v) throw ValidationError("soft metrics: label '" + y + "' has no embedding");
  return *v;
}

// Mean over `from` of the best floored cosine against `to`.
double soft_match(const LabelSet& from, const LabelSet& to, const EmbeddingTable& table) {
  if (from.empty()) return 0.0;
  std::vector<std::span<const double>> targets;
  for (const auto& y : to) targets.push_back(vector_of(y, table));
  double sum = 0.0;
  for (const auto& y : from) {
    const auto u = vector_of(y, table);
    double best = 0.0;
    for (const auto& v : targets) best = std::max(best, cosine(u, v));
    sum += best;
  }
  return sum / static_cast<double>(from.size());
}

}  // namespace

SoftScores soft_scores(const LabelSet& pred, const LabelSet& ref, const EmbeddingTable& table) {
  SoftScores out;
  if (ref.empty()) return out;
  out.precision = soft_match(pred, ref, table);
  out.recall = soft_match(ref, pred, table);
  out.f1 = harmonic_mean(out.precision, out.recall);
  return out;
}

double soft_precision(const LabelSet& pred, const LabelSet& ref, const EmbeddingTable& table) {
  return soft_scores(pred, ref, table).precision;
}
double soft_recall(const LabelSet& pred, const LabelSet& ref, const EmbeddingTable& table) {
  return soft_scores(pred, ref, table).recall;
}
double soft_f1(const LabelSet& pred, const LabelSet& ref, const EmbeddingTable& table) {
  return soft_scores(pred, ref, table).f1;
}

double coverage(const LabelSet& pred, const LabelSet& complete) {
  if (complete.empty()) throw ValidationError("coverage needs a non-empty complete label set");
  const std::size_t hits = intersection_size(pred, complete);
  const std::size_t unions = pred.size() + complete.size() - hits;
  return static_cast<double>(hits) / static_cast<double>(unions);
}

namespace {

struct Accumulator {
  double sum = 0.0;
  std::size_t n = 0;
  void add(const std::optional<double>& v) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  std::optional<double> mean() const {
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  }
};

}  // namespace

Evaluation evaluate(std::span<const RankedPrediction> predictions, const Corpus& corpus,
                    TestSet test_set, const EmbeddingTable* table) {
  std::vector<std::string> unknown;
  std::unordered_map<std::string, const RankedPrediction*> by_id;
  for (const auto& p : predictions) {
    if (!corpus.find(p.song_id)) unknown.push_back(p.song_id);
    if (!by_id.emplace(p.song_id, &p).second) {
      throw ValidationError("song '" + p.song_id + "' predicted twice");
    }
  }
  if (!unknown.empty()) {
    std::string list;
    for (std::size_t i = 0; i < unknown.size() && i < 20; ++i) {
      list += (i ? ", " : "") + unknown[i];
    }
    if (unknown.size() > 20) list += ", ...";
    throw ValidationError(std::to_string(unknown.size()) +
                          " predicted song ids are not in the corpus: " + list);
  }

  Evaluation eval;
  eval.conventions = {
      "empty prediction or reference set scores 0 for precision, recall and F1",
      "nDCG: binary gains, log2 discounts, ideal DCG over min(|pred|, |ref|) hits",
      "PSP/PSnDCG: normalized by the best ranking of the same length; propensity a=0.55, "
      "b=1.5, natural log, capped at 1",
      "soft metrics: negative cosines floored at 0; empty reference scores 0",
      "coverage: Jaccard similarity; songs with an empty reference are left out of the mean",
      "corpus scores: unweighted mean over predicted songs in corpus order",
  };
  if (test_set == TestSet::kComplete) {
    eval.conventions.push_back("PSP/PSnDCG not applicable against complete label sets");
  }

  const PropensityModel propensities(corpus);
  Accumulator p, r, f, n, ps, psn, sp, sr, sf, cov;
  for (const Song& song : corpus.songs()) {
    auto it = by_id.find(song.id);
    if (it == by_id.end()) continue;
    const RankedPrediction& pred = *it->second;
    const LabelSet* ref = &song.gold_labels;
    if (test_set == TestSet::kComplete) {
      if (!song.complete_labels) {
        throw ValidationError("song '" + song.id +
                              "' has no complete labels; cannot evaluate against complete sets");
      }
      ref = &*song.complete_labels;
    }
    const LabelSet pred_set(pred.labels.begin(), pred.labels.end());

    MetricsReport m;
    m.n_songs = 1;
    const auto pr = prf1(pred_set, *ref);
    m.precision = pr.precision;
    m.recall = pr.recall;
    m.f1 = pr.f1;
    m.ndcg = ndcg(pred.labels, *ref);
    if (test_set == TestSet::kGold) {
      const auto table_p = propensities.table(*ref);
      m.psp = psp(pred.labels, *ref, table_p);
      m.psndcg = psndcg(pred.labels, *ref, table_p);
    }
    if (table) {
      const auto soft = soft_scores(pred_set, *ref, *table);
      m.soft_precision = soft.precision;
      m.soft_recall = soft.recall;
      m.soft_f1 = soft.f1;
    }
    if (!ref->empty()) m.coverage = coverage(pred_set, *ref);

    p.add(m.precision);
    r.add(m.recall);
    f.add(m.f1);
    n.add(m.ndcg);
    ps.add(m.psp);
    psn.add(m.psndcg);
    sp.add(m.soft_precision);
    sr.add(m.soft_recall);
    sf.add(m.soft_f1);
    cov.add(m.coverage);
    eval.per_song.push_back({song.id, std::move(m)});
  }
  auto& s = eval.summary;
  s.n_songs = eval.per_song.size();
  s.precision = p.mean();
  s.recall = r.mean();
  s.f1 = f.mean();
  s.ndcg = n.mean();
  s.psp = ps.mean();
  s.psndcg = psn.mean();
  s.soft_precision = sp.mean();
  s.soft_recall = sr.mean();
  s.soft_f1 = sf.mean();
  s.coverage = cov.mean();
  return eval;
}

}  // namespace diva
