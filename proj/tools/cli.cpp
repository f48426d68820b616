#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "diva/classifier.hpp"
#include "diva/corpus.hpp"
#include "diva/embedding.hpp"
#include "diva/error.hpp"
#include "diva/metrics.hpp"
#include "diva/pipeline.hpp"
#include "diva/rng.hpp"

namespace diva::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string default_output_dir() {
  const char* env = std::getenv("DIVA_OUTPUT_DIR");
  return env && *env ? env : "diva-out";
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string hex(std::uint64_t h) {
  std::ostringstream s;
  s << std::hex << h;
  return s.str();
}

std::string embeddings_fingerprint(const EmbeddingTable& table) {
  std::ostringstream s;
  write_embeddings(s, table);
  return hex(fnv1a64(s.str()));
}

// Flat JSON config: {"lr": 0.3, "ablate": ["si"], "dump-scores": true}.
// Keys are long flag names; a flag given on the command line wins.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (!path) return args;

  std::ifstream in(*path);
  if (!in) throw IoError("cannot open config file '" + *path + "'");
  nlohmann::json config;
  try {
    in >> config;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(*path, 0, e.what());
  }
  if (!config.is_object()) throw ValidationError("config file must hold a JSON object");

  auto given = [&](const std::string& flag) {
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
  };
  auto scalar = [&](const std::string& key, const nlohmann::json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number()) return v.dump();
    throw ValidationError("config key '" + key + "' must be a string, number, boolean or list");
  };

  std::vector<std::string> extra;
  for (const auto& [key, value] : config.items()) {
    if (key == "config") throw ValidationError("config files cannot nest");
    const std::string flag = "--" + key;
    if (given(flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) extra.push_back(flag);
    } else if (value.is_array()) {
      for (const auto& v : value) {
        extra.push_back(flag);
        extra.push_back(scalar(key, v));
      }
    } else {
      extra.push_back(flag);
      extra.push_back(scalar(key, value));
    }
  }
  // The subcommand name stays first so the extra flags bind to it.
  std::vector<std::string> out;
  out.push_back(args.front());
  out.insert(out.end(), extra.begin(), extra.end());
  out.insert(out.end(), args.begin() + 1, args.end());
  return out;
}

// ---- gen -------------------------------------------------------------------

struct GenOptions {
  SyntheticConfig synthetic;
  std::size_t dim = 32;
  std::string out_dir;
};

void cmd_gen(const GenOptions& o) {
  const Corpus corpus = generate_synthetic(o.synthetic);
  const EmbeddingTable table = synthetic_embeddings(o.synthetic, o.dim, o.synthetic.seed);
  const fs::path dir(o.out_dir);
  ensure_directory(dir);

  std::ostringstream corpus_text, stop_text, emb_text;
  write_corpus(corpus_text, corpus);
  write_stopwords(stop_text, corpus.stopwords());
  write_embeddings(emb_text, table);
  write_file(dir / "corpus.jsonl", corpus_text.str());
  write_file(dir / "stopwords.txt", stop_text.str());
  write_file(dir / "embeddings.txt", emb_text.str());
  spdlog::info("wrote {} songs and {} embeddings (dim {}) to {}", corpus.n_songs(),
               table.size(), table.dim(), dir.string());
}

// ---- run -------------------------------------------------------------------

struct RunOptions {
  std::string corpus_path;
  std::string stopwords_path;
  std::string embeddings_path;
  std::string out_dir;
  std::string variant = "diva";
  std::string stopping = "psp";
  std::string sn_aggregation = "min";
  std::vector<std::string> ablate;
  std::optional<double> global_threshold;
  PipelineConfig pipeline;
};

std::string resolve_stopwords(const std::string& explicit_path, const std::string& corpus_path) {
  if (!explicit_path.empty()) return explicit_path;
  const fs::path sibling = fs::path(corpus_path).parent_path() / "stopwords.txt";
  return fs::exists(sibling) ? sibling.string() : std::string();
}

ordered_json record_json(const IterationRecord& r) {
  ordered_json j;
  j["iteration"] = r.iteration;
  j["new_classifier_labels"] = r.new_classifier;
  j["new_joint_labels"] = r.new_joint;
  j["store_size"] = r.store_size;
  j["train_psp"] = r.train_psp;
  j["train_psndcg"] = r.train_psndcg;
  j["loss_first_epoch"] = r.loss_first;
  j["loss_last_epoch"] = r.loss_last;
  j["pseudo_pairs_dropped"] = r.pseudo_dropped;
  return j;
}

ordered_json store_json(std::size_t iteration, const PseudoLabelStore& store) {
  ordered_json j;
  j["iteration"] = iteration;
  j["size"] = store.size();
  j["classifier"] = store.count(PseudoSource::kClassifier);
  j["joint"] = store.count(PseudoSource::kJoint);
  return j;
}

ordered_json config_json(const RunOptions& o) {
  const PipelineConfig& p = o.pipeline;
  ordered_json j;
  j["variant"] = to_string(p.variant);
  j["seed"] = p.seed;
  j["max_iterations"] = p.max_iterations;
  j["patience"] = p.patience;
  j["stopping"] = o.stopping;
  j["min_new_labels"] = p.min_new_labels;
  j["eval_k"] = p.eval_k;
  j["threads"] = p.threads;
  ordered_json t;
  t["learning_rate"] = p.train.learning_rate;
  t["epochs"] = p.train.epochs;
  t["batch_size"] = p.train.batch_size;
  t["negatives_per_positive"] = p.train.negatives_per_positive;
  t["subsample_threshold"] = p.train.subsample_threshold;
  t["theta_c"] = p.train.pseudo_confidence_threshold;
  t["hidden_units"] = p.train.hidden_units;
  t["fingerprint"] = p.train.fingerprint();
  j["train"] = t;
  ordered_json s;
  s["m"] = p.score.m;
  s["k"] = p.score.k;
  s["kmeans_iters"] = p.score.kmeans_iters;
  s["tau"] = p.score.tau;
  s["top_n"] = p.score.top_n;
  s["global_threshold"] =
      p.score.global_threshold ? ordered_json(*p.score.global_threshold) : ordered_json();
  s["enable_si"] = p.score.enable_si;
  s["enable_sn"] = p.score.enable_sn;
  s["enable_pv"] = p.score.enable_pv;
  s["enable_da"] = p.score.enable_da;
  s["sn_aggregation"] = o.sn_aggregation;
  j["score"] = s;
  return j;
}

std::string predictions_jsonl(const std::vector<SongPrediction>& predictions) {
  std::string out;
  for (const auto& p : predictions) {
    ordered_json line;
    line["id"] = p.song_id;
    ordered_json labels = ordered_json::array();
    for (const auto& l : p.labels) {
      ordered_json e;
      e["label"] = l.label;
      e["score"] = l.score;
      e["source"] = to_string(l.source);
      labels.push_back(std::move(e));
    }
    line["labels"] = std::move(labels);
    out += line.dump() + '\n';
  }
  return out;
}

std::string iteration_file(const char* stem, std::size_t it, const char* ext) {
  char name[64];
  std::snprintf(name, sizeof name, "%s_%02zu%s", stem, it, ext);
  return name;
}

void cmd_run(RunOptions o) {
  PipelineConfig& p = o.pipeline;
  p.variant = parse_variant(o.variant);
  p.stopping = o.stopping == "psp" ? StoppingRule::kPsp : StoppingRule::kNewLabelThreshold;
  p.score.sn_aggregation = o.sn_aggregation == "max" ? SnAggregation::kMax : SnAggregation::kMin;
  p.score.global_threshold = o.global_threshold;
  for (const auto& a : o.ablate) {
    if (a == "si") p.score.enable_si = false;
    if (a == "sn") p.score.enable_sn = false;
    if (a == "pv") p.score.enable_pv = false;
    if (a == "da") p.score.enable_da = false;
  }
  p.train.seed = p.seed;
  p.score.seed = p.seed;
  p.validate();

  const Corpus corpus =
      load_corpus(o.corpus_path, resolve_stopwords(o.stopwords_path, o.corpus_path));
  const EmbeddingTable table = load_embeddings(o.embeddings_path);
  const fs::path dir(o.out_dir);
  ensure_directory(dir);

  const RunResult result = run(corpus, table, p);

  ordered_json manifest;
  manifest["tool"] = "diva";
  manifest["version"] = kVersion;
  manifest["command"] = "run";
  manifest["seed"] = p.seed;
  manifest["corpus_fingerprint"] = corpus_fingerprint(corpus);
  manifest["corpus_songs"] = corpus.n_songs();
  manifest["embeddings_fingerprint"] = embeddings_fingerprint(table);
  manifest["embedding_dim"] = table.dim();
  manifest["config"] = config_json(o);
  ordered_json records = ordered_json::array();
  for (const auto& r : result.history) records.push_back(record_json(r));
  manifest["iterations"] = std::move(records);
  ordered_json stores = ordered_json::array();
  for (std::size_t i = 0; i < result.store_history.size(); ++i) {
    stores.push_back(store_json(result.history[i].iteration, result.store_history[i]));
  }
  manifest["store_by_iteration"] = std::move(stores);
  manifest["store"] = store_json(result.history.empty() ? 0 : result.history.back().iteration,
                                 result.store());
  manifest["skipped_songs"] = result.skipped_songs;
  std::size_t predicted = 0;
  for (const auto& s : result.predictions) predicted += s.labels.size();
  manifest["predicted_labels"] = predicted;

  write_file(dir / "manifest.json", manifest.dump(2) + '\n');
  write_file(dir / "predictions.jsonl", predictions_jsonl(result.predictions));

  if (!result.checkpoints.empty()) {
    const fs::path ckpt_dir = dir / "checkpoints";
    ensure_directory(ckpt_dir);
    for (std::size_t i = 0; i < result.checkpoints.size(); ++i) {
      std::ostringstream s;
      save_checkpoint(s, result.checkpoints[i], p.train.fingerprint());
      write_file(ckpt_dir / iteration_file("iter", result.history[i].iteration, ".ckpt"),
                 s.str());
    }
  }
  if (p.dump_scores && !result.score_dump.empty()) {
    const fs::path score_dir = dir / "scores";
    ensure_directory(score_dir);
    std::map<std::size_t, std::string> files;
    for (const auto& e : result.score_dump) {
      ordered_json line;
      line["id"] = e.song_id;
      line["label"] = e.breakdown.label;
      line["si"] = e.breakdown.si;
      line["sn"] = e.breakdown.sn;
      line["pv"] = e.breakdown.pv;
      line["da"] = e.breakdown.da;
      line["j"] = e.breakdown.j;
      files[e.iteration] += line.dump() + '\n';
    }
    for (const auto& [it, text] : files) {
      write_file(score_dir / iteration_file("iter", it, ".jsonl"), text);
    }
  }
  spdlog::info("{}: {} iterations, store {}, {} predicted labels -> {}", to_string(p.variant),
               result.history.size(), result.store().size(), predicted, dir.string());
}

// ---- eval ------------------------------------------------------------------

struct EvalOptions {
  std::string predictions_path;
  std::string corpus_path;
  std::string stopwords_path;
  std::string embeddings_path;
  std::string test_set = "gold";
  std::string out_dir;
};

std::vector<RankedPrediction> load_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open prediction file '" + path + "'");
  std::vector<RankedPrediction> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(path, line_no, e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string() || !j.contains("labels") ||
        !j["labels"].is_array()) {
      throw ParseError(path, line_no, "expected {\"id\": string, \"labels\": [...]}");
    }
    RankedPrediction p{j["id"].get<std::string>(), {}};
    for (const auto& l : j["labels"]) {
      if (l.is_string()) {
        p.labels.push_back(l.get<std::string>());
      } else if (l.is_object() && l.contains("label") && l["label"].is_string()) {
        p.labels.push_back(l["label"].get<std::string>());
      } else {
        throw ParseError(path, line_no, "labels must be strings or {\"label\": string}");
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

ordered_json optional_json(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json();
}

ordered_json metrics_json(const MetricsReport& m) {
  ordered_json j;
  j["precision"] = optional_json(m.precision);
  j["recall"] = optional_json(m.recall);
  j["f1"] = optional_json(m.f1);
  j["ndcg"] = optional_json(m.ndcg);
  j["psp"] = optional_json(m.psp);
  j["psndcg"] = optional_json(m.psndcg);
  j["soft_precision"] = optional_json(m.soft_precision);
  j["soft_recall"] = optional_json(m.soft_recall);
  j["soft_f1"] = optional_json(m.soft_f1);
  j["coverage"] = optional_json(m.coverage);
  return j;
}

void cmd_eval(const EvalOptions& o) {
  const Corpus corpus =
      load_corpus(o.corpus_path, resolve_stopwords(o.stopwords_path, o.corpus_path));
  const auto predictions = load_predictions(o.predictions_path);
  std::optional<EmbeddingTable> table;
  if (!o.embeddings_path.empty()) table = load_embeddings(o.embeddings_path);
  const TestSet test_set = o.test_set == "complete" ? TestSet::kComplete : TestSet::kGold;

  const Evaluation eval =
      evaluate(predictions, corpus, test_set, table ? &*table : nullptr);

  ordered_json report;
  report["tool"] = "diva";
  report["version"] = kVersion;
  report["command"] = "eval";
  report["test_set"] = o.test_set;
  report["corpus_fingerprint"] = corpus_fingerprint(corpus);
  report["n_songs"] = eval.summary.n_songs;
  report["metrics"] = metrics_json(eval.summary);
  ordered_json na = ordered_json::array();
  if (test_set == TestSet::kComplete) {
    na.push_back("psp");
    na.push_back("psndcg");
  }
  if (!table) {
    na.push_back("soft_precision");
    na.push_back("soft_recall");
    na.push_back("soft_f1");
  }
  report["not_applicable"] = std::move(na);
  report["conventions"] = eval.conventions;

  std::string per_song;
  for (const auto& s : eval.per_song) {
    ordered_json line;
    line["id"] = s.song_id;
    line["metrics"] = metrics_json(s.metrics);
    per_song += line.dump() + '\n';
  }

  const fs::path dir(o.out_dir);
  ensure_directory(dir);
  write_file(dir / "metrics.json", report.dump(2) + '\n');
  write_file(dir / "per_song.jsonl", per_song);
  spdlog::info("evaluated {} songs against {} labels -> {}", eval.summary.n_songs, o.test_set,
               dir.string());
}

// ---- wiring ----------------------------------------------------------------

void report_error(std::ostream& err, const char* kind, const std::string& message) {
  ordered_json j;
  j["error"]["kind"] = kind;
  j["error"]["message"] = message;
  err << j.dump() << '\n';
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kValidation: return kExitValidation;
    case ErrorKind::kIo: return kExitIo;
    case ErrorKind::kInternal: return kExitInternal;
  }
  return kExitInternal;
}

void set_log_level(const std::string& level) {
  static const std::map<std::string, spdlog::level::level_enum> kLevels = {
      {"trace", spdlog::level::trace}, {"debug", spdlog::level::debug},
      {"info", spdlog::level::info},   {"warn", spdlog::level::warn},
      {"error", spdlog::level::err},   {"off", spdlog::level::off}};
  spdlog::set_level(kLevels.at(level));
}

}  // namespace

int run_command(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app("Iterative label harvesting for songs from user comments", "diva");
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::string log_level = "info";
  const std::vector<std::string> levels = {"trace", "debug", "info", "warn", "error", "off"};
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--log-level", log_level, "Logging verbosity on stderr")
        ->check(CLI::IsMember(levels))
        ->capture_default_str();
    sub->add_option("--config", "Flat JSON file of flag values; command-line flags win");
  };

  GenOptions gen;
  gen.out_dir = default_output_dir();
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic corpus and embedding table");
  {
    SyntheticConfig& s = gen.synthetic;
    gen_cmd->add_option("--out", gen.out_dir, "Output directory (default $DIVA_OUTPUT_DIR)")
        ->capture_default_str();
    gen_cmd->add_option("--songs", s.n_songs, "Number of songs")->capture_default_str();
    gen_cmd->add_option("--vocab", s.vocab_size, "Distinct label words")->capture_default_str();
    gen_cmd->add_option("--gold", s.labels_per_song_gold, "Gold labels per song")
        ->capture_default_str();
    gen_cmd->add_option("--complete", s.labels_per_song_complete, "Complete labels per song")
        ->capture_default_str();
    gen_cmd->add_option("--comments", s.comments_per_song, "Comments per song")
        ->capture_default_str();
    gen_cmd->add_option("--words", s.words_per_comment, "Words per comment")
        ->capture_default_str();
    gen_cmd->add_option("--noise", s.noise_token_ratio, "Share of filler slots holding noise")
        ->capture_default_str();
    gen_cmd->add_option("--background", s.background_label_ratio,
                        "Share of filler slots mentioning an arbitrary label word")
        ->capture_default_str();
    gen_cmd->add_option("--topics", s.n_topics, "Topic count (0 derives it from --vocab)")
        ->capture_default_str();
    gen_cmd->add_option("--oov", s.oov_fraction, "Share of each topic's labels never gold")
        ->capture_default_str();
    gen_cmd->add_option("--noise-vocab", s.noise_vocab_size, "Noise words (0 = 6 x --vocab)")
        ->capture_default_str();
    gen_cmd->add_option("--stopword-ratio", s.stopword_ratio, "Share of stopword slots")
        ->capture_default_str();
    gen_cmd->add_option("--dim", gen.dim, "Embedding dimension")->capture_default_str();
    gen_cmd->add_option("--seed", s.seed, "Random seed")->capture_default_str();
    add_common(gen_cmd);
  }

  RunOptions run_opts;
  run_opts.out_dir = default_output_dir();
  auto* run_cmd = app.add_subcommand("run", "Run a labeling pipeline variant");
  {
    PipelineConfig& p = run_opts.pipeline;
    run_cmd->add_option("--corpus", run_opts.corpus_path, "Corpus JSON Lines file")->required();
    run_cmd->add_option("--embeddings", run_opts.embeddings_path, "Embedding text file")
        ->required();
    run_cmd->add_option("--stopwords", run_opts.stopwords_path,
                        "Stopword file (default: stopwords.txt next to the corpus)");
    run_cmd->add_option("--out", run_opts.out_dir, "Output directory (default $DIVA_OUTPUT_DIR)")
        ->capture_default_str();
    run_cmd->add_option("--variant", run_opts.variant, "Pipeline variant")
        ->check(CLI::IsMember({"diva", "diva_static", "diva_light", "nst", "tfidf", "mlc"}))
        ->capture_default_str();
    run_cmd->add_option("--max-iter", p.max_iterations, "Fine-tuning rounds after iteration 0")
        ->capture_default_str();
    run_cmd->add_option("--patience", p.patience, "Iterations without PSP gain before stopping")
        ->capture_default_str();
    run_cmd->add_option("--stopping", run_opts.stopping, "Stopping rule")
        ->check(CLI::IsMember({"psp", "new-labels"}))
        ->capture_default_str();
    run_cmd->add_option("--min-new-labels", p.min_new_labels,
                        "Threshold for --stopping new-labels")
        ->capture_default_str();
    run_cmd->add_option("--eval-k", p.eval_k, "Ranking depth of the training PSP monitor")
        ->capture_default_str();
    run_cmd->add_option("--lr", p.train.learning_rate, "Learning rate")->capture_default_str();
    run_cmd->add_option("--epochs", p.train.epochs, "Epochs per training round")
        ->capture_default_str();
    run_cmd->add_option("--batch-size", p.train.batch_size, "Mini-batch size")
        ->capture_default_str();
    run_cmd->add_option("--negatives", p.train.negatives_per_positive,
                        "Negatives sampled per positive")
        ->capture_default_str();
    run_cmd->add_option("--subsample", p.train.subsample_threshold, "Subsampling threshold t")
        ->capture_default_str();
    run_cmd->add_option("--theta-c", p.train.pseudo_confidence_threshold,
                        "Classifier pseudo-label confidence threshold")
        ->capture_default_str();
    run_cmd->add_option("--hidden", p.train.hidden_units, "Hidden units (0 = affine model)")
        ->capture_default_str();
    run_cmd->add_option("--tau", p.score.tau, "Practical value / discrimination threshold")
        ->capture_default_str();
    run_cmd->add_option("--top-n", p.score.top_n, "Joint-score pseudo-labels per song")
        ->capture_default_str();
    run_cmd->add_option("--global-threshold", run_opts.global_threshold,
                        "Select every candidate with J at or above this instead of --top-n");
    run_cmd->add_option("--m", p.score.m, "Clusterings in the novelty ensemble")
        ->capture_default_str();
    run_cmd->add_option("--k", p.score.k, "Clusters per clustering (0 = ceil(sqrt(labels)))")
        ->capture_default_str();
    run_cmd->add_option("--kmeans-iters", p.score.kmeans_iters, "Lloyd rounds per clustering")
        ->capture_default_str();
    run_cmd->add_option("--ablate", run_opts.ablate, "Disable a joint-score factor (repeatable)")
        ->check(CLI::IsMember({"si", "sn", "pv", "da"}));
    run_cmd->add_option("--sn-aggregation", run_opts.sn_aggregation,
                        "Cluster similarity aggregation in semantic novelty")
        ->check(CLI::IsMember({"min", "max"}))
        ->capture_default_str();
    run_cmd->add_option("--seed", p.seed, "Random seed")->capture_default_str();
    run_cmd->add_option("--threads", p.threads, "Worker threads within an iteration")
        ->capture_default_str();
    run_cmd->add_flag("--dump-scores", p.dump_scores,
                      "Write every joint-score breakdown under scores/");
    add_common(run_cmd);
  }

  EvalOptions eval_opts;
  eval_opts.out_dir = default_output_dir();
  auto* eval_cmd = app.add_subcommand("eval", "Score predictions against a corpus");
  {
    eval_cmd->add_option("--predictions", eval_opts.predictions_path, "Prediction JSON Lines")
        ->required();
    eval_cmd->add_option("--corpus", eval_opts.corpus_path, "Corpus JSON Lines file")
        ->required();
    eval_cmd->add_option("--stopwords", eval_opts.stopwords_path,
                         "Stopword file (default: stopwords.txt next to the corpus)");
    eval_cmd->add_option("--embeddings", eval_opts.embeddings_path,
                         "Embedding file; enables the soft metrics");
    eval_cmd->add_option("--test-set", eval_opts.test_set, "Reference label sets")
        ->check(CLI::IsMember({"gold", "complete"}))
        ->capture_default_str();
    eval_cmd->add_option("--out", eval_opts.out_dir,
                         "Output directory (default $DIVA_OUTPUT_DIR)")
        ->capture_default_str();
    add_common(eval_cmd);
  }

  try {
    if (!args.empty()) args = expand_config(args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      // --help / --version
      app.exit(e, out, err);
      return kExitOk;
    }
    report_error(err, "validation", e.what());
    return kExitValidation;
  } catch (const Error& e) {
    report_error(err, to_string(e.kind()), e.what());
    return exit_code(e.kind());
  }

  auto previous = spdlog::default_logger();
  spdlog::set_default_logger(std::make_shared<spdlog::logger>(
      "diva", std::make_shared<spdlog::sinks::stderr_sink_st>()));
  set_log_level(log_level);

  int code = kExitOk;
  try {
    if (*gen_cmd) cmd_gen(gen);
    if (*run_cmd) cmd_run(run_opts);
    if (*eval_cmd) cmd_eval(eval_opts);
  } catch (const Error& e) {
    report_error(err, to_string(e.kind()), e.what());
    code = exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    report_error(err, "io", e.what());
    code = kExitIo;
  } catch (const std::exception& e) {
    report_error(err, "internal", e.what());
    code = kExitInternal;
  }
  spdlog::set_default_logger(previous);
  return code;
}

}  // namespace diva::cli
