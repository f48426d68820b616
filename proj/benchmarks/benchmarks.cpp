#include <benchmark/benchmark.h>

#include "diva/classifier.hpp"
#include "diva/kmeans.hpp"
#include "diva/metrics.hpp"
#include "diva/pipeline.hpp"
#include "diva/scoring.hpp"

namespace {

using namespace diva;

struct World {
  SyntheticConfig config;
  Corpus corpus;
  EmbeddingTable table;
  std::vector<std::optional<Vector>> docs;
};

const World& world() {
  static const World w = [] {
    SyntheticConfig cfg;
    cfg.seed = 1;
    Corpus corpus = generate_synthetic(cfg);
    EmbeddingTable table = synthetic_embeddings(cfg, 32, 1);
    auto docs = embed_corpus(corpus, table);
    return World{cfg, std::move(corpus), std::move(table), std::move(docs)};
  }();
  return w;
}

Vector random_vector(Rng& rng, std::size_t dim) {
  Vector v(dim);
  for (double& x : v) x = rng.normal();
  return v;
}

void BM_Forward(benchmark::State& state) {
  const auto hidden = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const auto model = BinaryClassifier::initialized(32, hidden, rng);
  const Vector d = random_vector(rng, 32), y = random_vector(rng, 32);
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(d, y));
}
BENCHMARK(BM_Forward)->Arg(0)->Arg(32);

void BM_GradientStep(benchmark::State& state) {
  const auto hidden = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  const auto model = BinaryClassifier::initialized(32, hidden, rng);
  const Vector d = random_vector(rng, 32), y = random_vector(rng, 32);
  std::vector<double> grad(model.parameters().size());
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.accumulate_gradient(d, y, 1, grad));
  }
}
BENCHMARK(BM_GradientStep)->Arg(0)->Arg(32);

void BM_TrainGoldOnly(benchmark::State& state) {
  const World& w = world();
  TrainConfig cfg;
  cfg.hidden_units = 32;
  cfg.learning_rate = 0.3;
  cfg.epochs = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    Rng rng(3);
    auto r = train(BinaryClassifier::initialized(32, 32, rng), w.corpus, w.table, w.docs, {},
                   cfg, rng);
    benchmark::DoNotOptimize(r.epoch_losses.back());
  }
}
BENCHMARK(BM_TrainGoldOnly)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_KMeans(benchmark::State& state) {
  Rng rng(4);
  std::vector<Vector> points;
  for (int i = 0; i < state.range(0); ++i) points.push_back(random_vector(rng, 32));
  const auto k = static_cast<std::size_t>(std::ceil(std::sqrt(points.size())));
  for (auto _ : state) {
    Rng r(5);
    benchmark::DoNotOptimize(kmeans(points, k, 50, r).inertia);
  }
}
BENCHMARK(BM_KMeans)->Arg(64)->Arg(256);

void BM_JointScoreSong(benchmark::State& state) {
  const World& w = world();
  Rng rng(6);
  const auto model = BinaryClassifier::initialized(32, 32, rng);
  const CorpusStatistics stats(w.corpus);
  ScoreConfig cfg;
  JointScorer scorer(w.corpus, w.table, model, w.docs,
                     build_label_clusters(w.corpus.gold_vocab(), w.table, cfg, rng), stats, cfg);
  const Song& song = w.corpus.songs().front();
  const LabelSet candidates = inference_candidates(song, w.corpus.gold_vocab());
  scorer.prepare(candidates);
  for (auto _ : state) {
    double total = 0.0;
    for (const auto& y : candidates) {
      if (auto b = scorer.score(y, song)) total += b->j;
    }
    benchmark::DoNotOptimize(total);
  }
}
BENCHMARK(BM_JointScoreSong);

void BM_EvaluateComplete(benchmark::State& state) {
  const World& w = world();
  std::vector<RankedPrediction> preds;
  for (const Song& s : w.corpus.songs()) {
    preds.push_back({s.id, std::vector<Label>(s.gold_labels.begin(), s.gold_labels.end())});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        evaluate(preds, w.corpus, TestSet::kComplete, &w.table).summary.coverage);
  }
}
BENCHMARK(BM_EvaluateComplete)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
