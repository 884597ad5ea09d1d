#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sys/wait.h>

#include "test_util.hpp"

using namespace depfuse;
using testutil::data_path;
using testutil::read_file;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

// Runs the CLI with stderr folded into stdout.
CliRun cli(const std::string& args) {
  const std::string cmd = std::string(DEPFUSE_CLI) + " " + args + " 2>&1";
  CliRun r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

std::string resources() {
  return " --profanity " + q(data_path("profanity.weights")) + " --lexicon " + q(data_path("lexicon_toy.tsv"));
}

void write(const std::filesystem::path& p, const std::string& s) {
  std::ofstream(p) << s;
}

void expect_one_line_error(const CliRun& r) {
  EXPECT_NE(r.code, 0);
  EXPECT_EQ(r.out.rfind("error: ", 0), 0u) << r.out;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 1) << r.out;
}

}  // namespace

TEST(Cli, IngestToyPosts) {
  const auto dir = testutil::temp_dir("cli_ingest");
  const auto r = cli("ingest " + q(data_path("posts_toy.jsonl")) + " --out " + q(dir));
  ASSERT_EQ(r.code, 0) << r.out;
  const auto report = Json::parse(read_file((dir / "report.json").string()));
  EXPECT_EQ(report["items"], 20);
  EXPECT_TRUE(report["ok"].get<bool>());
  EXPECT_EQ(load_post_jsonl((dir / "dataset.jsonl").string()).size(), 20u);
}

TEST(Cli, IngestReportsBadLine) {
  const auto dir = testutil::temp_dir("cli_badline");
  write(dir / "bad.jsonl",
        "{\"id\":\"a\",\"text\":\"x\",\"label\":\"control\"}\n"
        "{\"id\":\"b\",\"text\":\"y\",\"label\":\"control\"}\n"
        "{\"id\":\"c\",\"text\":\n");
  const auto r = cli("ingest " + q(dir / "bad.jsonl") + " --out " + q(dir / "o"));
  expect_one_line_error(r);
  EXPECT_NE(r.out.find("line 3"), std::string::npos) << r.out;
}

TEST(Cli, IngestRejectsEmptyUser) {
  const auto dir = testutil::temp_dir("cli_emptyuser");
  write(dir / "u.jsonl", "{\"user_id\":\"u\",\"label\":\"control\",\"posts\":[]}\n");
  expect_one_line_error(cli("ingest " + q(dir / "u.jsonl") + " --granularity user --out " + q(dir / "o")));
}

TEST(Cli, AnalyzeIsReproducible) {
  const auto dir = testutil::temp_dir("cli_analyze");
  const std::string args = "analyze --dataset " + q(data_path("posts_toy.jsonl")) + resources();
  ASSERT_EQ(cli(args + " --out " + q(dir / "a")).code, 0);
  ASSERT_EQ(cli(args + " --out " + q(dir / "b")).code, 0);
  for (const char* f : {"stats.json", "hist_harm_care.csv", "hist_degradation_purity.csv"}) {
    EXPECT_EQ(read_file((dir / "a" / f).string()), read_file((dir / "b" / f).string())) << f;
  }
  const auto stats = Json::parse(read_file((dir / "a" / "stats.json").string()));
  for (const char* cls : {"depressed", "control"}) {
    const auto& c = stats["classes"][cls];
    for (const char* k : {"items", "posts", "avg_words_per_post", "avg_profanity", "morality"}) {
      EXPECT_TRUE(c.contains(k)) << cls << " " << k;
    }
    EXPECT_EQ(c["morality"].size(), 5u);
  }
}

TEST(Cli, AnalyzeMissingLexicon) {
  const auto dir = testutil::temp_dir("cli_nolex");
  expect_one_line_error(cli("analyze --dataset " + q(data_path("posts_toy.jsonl")) + " --profanity " +
                            q(data_path("profanity.weights")) + " --lexicon " + q(dir / "none.tsv") + " --out " +
                            q(dir)));
}

TEST(Cli, UnknownCommandFails) {
  const auto r = cli("frobnicate");
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.out.find("error"), std::string::npos);
}

TEST(Cli, MissingCheckpoint) {
  expect_one_line_error(cli("predict --checkpoint /nonexistent/model.ckpt --text hi"));
}

class CliTrained : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = testutil::temp_dir("cli_trained");
    const auto base = "--seed 9 --features B+P+M --set train.epochs=3 --set model.hidden_size=8" + resources() +
                      " train --dataset " + q(data_path("posts_toy.jsonl"));
    run_a_ = cli(base + " --out " + q(dir_ / "a"));
    run_b_ = cli(base + " --out " + q(dir_ / "b"));
  }

  static inline std::filesystem::path dir_;
  static inline CliRun run_a_, run_b_;
};

TEST_F(CliTrained, TrainTwiceIsIdentical) {
  ASSERT_EQ(run_a_.code, 0) << run_a_.out;
  ASSERT_EQ(run_b_.code, 0) << run_b_.out;
  for (const char* f : {"history.jsonl", "model.ckpt"}) {
    const auto a = read_file((dir_ / "a" / f).string());
    EXPECT_FALSE(a.empty()) << f;
    EXPECT_EQ(a, read_file((dir_ / "b" / f).string())) << f;
  }
}

TEST_F(CliTrained, PredictMatchesLibrary) {
  const auto ckpt = dir_ / "a" / "model.ckpt";
  const std::string text = "I feel so alone and hurt, damn it";
  const std::string args = "predict --checkpoint " + q(ckpt) + resources() + " --text \"" + text + "\"";
  const auto r1 = cli(args);
  ASSERT_EQ(r1.code, 0) << r1.out;
  EXPECT_EQ(r1.out, cli(args).out);
  const auto row = Json::parse(r1.out);
  const double p = row["probability"].get<double>();
  EXPECT_GE(p, 0.0);
  EXPECT_LE(p, 1.0);

  auto pipeline = Pipeline::load(ckpt.string());
  pipeline.attach(std::make_shared<const ProfanityModel>(testutil::shipped_profanity()),
                  std::make_shared<const MoralLexicon>(testutil::toy_lexicon()));
  const auto in = pipeline.prepare(Post{"input", text, std::nullopt, std::nullopt});
  const Vector probs = forward(in, pipeline.model(), pipeline.model().features());
  EXPECT_NEAR(p, probs(1), 1e-12);
  EXPECT_EQ(row["label"], std::string(to_string(predicted_label(probs))));
  EXPECT_EQ(row["x"].size(), 11u);
}

TEST_F(CliTrained, EvaluateWritesMetrics) {
  const auto out = dir_ / "eval";
  const auto r = cli("evaluate --dataset " + q(data_path("posts_toy.jsonl")) + " --checkpoint " +
                     q(dir_ / "a" / "model.ckpt") + resources() + " --out " + q(out));
  ASSERT_EQ(r.code, 0) << r.out;
  const auto m = Json::parse(read_file((out / "metrics.json").string()));
  EXPECT_EQ(m["tp"].get<int>() + m["fp"].get<int>() + m["fn"].get<int>() + m["tn"].get<int>(), 20);
}

TEST_F(CliTrained, FeatureMismatchRejected) {
  expect_one_line_error(cli("--features B+P predict --checkpoint " + q(dir_ / "a" / "model.ckpt") + resources() +
                            " --text hello"));
}
