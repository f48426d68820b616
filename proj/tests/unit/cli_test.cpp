#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"

namespace {

namespace fs = std::filesystem;
using diva::cli::run_command;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("diva_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int cli(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return run_command(std::move(args), out_, err_);
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

TEST_F(CliTest, HelpExitsZero) {
  EXPECT_EQ(cli({"--help"}), diva::cli::kExitOk);
  EXPECT_NE(out_.str().find("gen"), std::string::npos);
}

TEST_F(CliTest, GenRunEvalProduceArtifacts) {
  ASSERT_EQ(cli({"gen", "--out", path("data"), "--songs", "20", "--dim", "8", "--seed", "3"}), 0)
      << err_.str();
  EXPECT_TRUE(fs::exists(dir_ / "data/corpus.jsonl"));
  EXPECT_TRUE(fs::exists(dir_ / "data/stopwords.txt"));
  EXPECT_TRUE(fs::exists(dir_ / "data/embeddings.txt"));

  ASSERT_EQ(cli({"run", "--corpus", path("data/corpus.jsonl"), "--embeddings",
                 path("data/embeddings.txt"), "--out", path("run"), "--max-iter", "1",
                 "--epochs", "3", "--hidden", "4", "--dump-scores", "--log-level", "warn"}),
            0)
      << err_.str();
  EXPECT_TRUE(fs::exists(dir_ / "run/manifest.json"));
  EXPECT_TRUE(fs::exists(dir_ / "run/predictions.jsonl"));
  EXPECT_TRUE(fs::exists(dir_ / "run/checkpoints/iter_00.ckpt"));
  const auto manifest = nlohmann::json::parse(slurp(dir_ / "run/manifest.json"));
  EXPECT_EQ(manifest["seed"], 0);
  EXPECT_EQ(manifest["corpus_songs"], 20);
  EXPECT_EQ(manifest["config"]["variant"], "diva");

  ASSERT_EQ(cli({"eval", "--predictions", path("run/predictions.jsonl"), "--corpus",
                 path("data/corpus.jsonl"), "--embeddings", path("data/embeddings.txt"),
                 "--test-set", "complete", "--out", path("eval")}),
            0)
      << err_.str();
  const auto metrics = nlohmann::json::parse(slurp(dir_ / "eval/metrics.json"));
  EXPECT_TRUE(metrics["metrics"]["coverage"].is_number());
  EXPECT_TRUE(metrics["metrics"]["psp"].is_null());
  EXPECT_TRUE(fs::exists(dir_ / "eval/per_song.jsonl"));
}

TEST_F(CliTest, ConfigFileSuppliesFlagsAndCommandLineWins) {
  ASSERT_EQ(cli({"gen", "--out", path("data"), "--songs", "12", "--dim", "8"}), 0);
  std::ofstream(path("cfg.json")) << R"({"variant": "tfidf", "top-n": 3, "seed": 9})";
  ASSERT_EQ(cli({"run", "--config", path("cfg.json"), "--corpus", path("data/corpus.jsonl"),
                 "--embeddings", path("data/embeddings.txt"), "--out", path("run"), "--seed",
                 "4"}),
            0)
      << err_.str();
  const auto manifest = nlohmann::json::parse(slurp(dir_ / "run/manifest.json"));
  EXPECT_EQ(manifest["config"]["variant"], "tfidf");
  EXPECT_EQ(manifest["seed"], 4);
}

TEST_F(CliTest, MissingEmbeddingsIsIoError) {
  ASSERT_EQ(cli({"gen", "--out", path("data"), "--songs", "5"}), 0);
  EXPECT_EQ(cli({"run", "--corpus", path("data/corpus.jsonl"), "--embeddings",
                 path("absent.txt"), "--out", path("run")}),
            diva::cli::kExitIo);
  const auto err = nlohmann::json::parse(err_.str());
  EXPECT_EQ(err["error"]["kind"], "io");
}

TEST_F(CliTest, InvalidValuesAreValidationErrors) {
  EXPECT_EQ(cli({"gen", "--out", path("data"), "--vocab", "0"}), diva::cli::kExitValidation);
  EXPECT_EQ(nlohmann::json::parse(err_.str())["error"]["kind"], "validation");
  EXPECT_EQ(cli({"gen", "--no-such-flag"}), diva::cli::kExitValidation);
  ASSERT_EQ(cli({"gen", "--out", path("data"), "--songs", "5"}), 0);
  EXPECT_EQ(cli({"run", "--corpus", path("data/corpus.jsonl"), "--embeddings",
                 path("data/embeddings.txt"), "--out", path("run"), "--ablate", "xx"}),
            diva::cli::kExitValidation);
}

TEST_F(CliTest, EvalRejectsPredictionsForUnknownSongs) {
  ASSERT_EQ(cli({"gen", "--out", path("data"), "--songs", "5"}), 0);
  std::ofstream(path("preds.jsonl")) << R"({"id": "nobody", "labels": ["x"]})" << "\n";
  EXPECT_EQ(cli({"eval", "--predictions", path("preds.jsonl"), "--corpus",
                 path("data/corpus.jsonl"), "--out", path("eval")}),
            diva::cli::kExitValidation);
}

TEST_F(CliTest, EvalRejectsMalformedPredictions) {
  ASSERT_EQ(cli({"gen", "--out", path("data"), "--songs", "5"}), 0);
  std::ofstream(path("preds.jsonl")) << "{not json\n";
  EXPECT_EQ(cli({"eval", "--predictions", path("preds.jsonl"), "--corpus",
                 path("data/corpus.jsonl"), "--out", path("eval")}),
            diva::cli::kExitValidation);
}

}  // namespace
