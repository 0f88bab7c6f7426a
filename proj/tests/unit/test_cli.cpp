#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "iomlab/dataset.hpp"
#include "iomlab/report.hpp"

namespace fs = std::filesystem;
using namespace iomlab;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "iomlab");
  std::ostringstream out;
  std::ostringstream err;
  Run r;
  r.code = cli::dispatch(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("iomlab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string small_corpus() {
    const auto p = path("corpus.csv");
    const auto r = run({"synth", "--users", "6", "--samples", "3", "--n", "30", "--seed", "5",
                        "--out", p});
    EXPECT_EQ(r.code, cli::kExitOk) << r.err;
    return p;
  }

  fs::path dir_;
};

nlohmann::json error_line(const std::string& err) {
  std::istringstream in(err);
  std::string line;
  std::string last;
  while (std::getline(in, line)) {
    if (!line.empty()) last = line;
  }
  return nlohmann::json::parse(last);
}

}  // namespace

TEST_F(Cli, SynthWritesCorpus) {
  const auto p = small_corpus();
  const auto c = load_corpus(p);
  EXPECT_EQ(c.users.size(), 6u);
  EXPECT_EQ(c.min_samples_per_user(), 3u);
  EXPECT_EQ(c.n, 30u);
}

TEST_F(Cli, VerifyIdenticalTemplatesAccepted) {
  const auto corpus = small_corpus();
  const auto t1 = path("t1.csv");
  auto r = run({"enroll", "--corpus", corpus, "--k", "4", "--m", "20", "--seed", "3", "--out", t1});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  r = run({"verify", "--a", t1, "--b", t1, "--tau", "1.0"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j["accepted"].get<bool>());
}

TEST_F(Cli, AttackGrpAuthReport) {
  const auto corpus = small_corpus();
  const auto out = path("report.json");
  const auto r = run({"attack", "grp-auth", "--corpus", corpus, "--k", "4", "--m", "20", "--seed", "7",
                      "--tau", "0.06", "--out", out});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto report = load_report(out);
  EXPECT_EQ(report.column("N=1").rates.at("rate_auth"), 1.0);
  EXPECT_EQ(report.config["seed"], 7);
  EXPECT_NE(r.err.find("\"finished\""), std::string::npos);
}

TEST_F(Cli, AttackCsvAndReportReemit) {
  const auto corpus = small_corpus();
  const auto json_path = path("r.json");
  auto r = run({"attack", "grp-longlived", "--corpus", corpus, "--k", "4", "--m", "20", "--leaks", "1,2",
                "--out", json_path});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  r = run({"report", "--in", json_path, "--format", "csv"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_EQ(r.out.rfind("statistic,N=1,N=2\n", 0), 0u) << r.out;
}

TEST_F(Cli, ConfigFileAndFlagPrecedence) {
  const auto corpus = small_corpus();
  const auto cfg = path("run.json");
  std::ofstream(cfg) << R"({"params": {"n": 30, "k": 4, "m": 20, "p": 1, "tau": 0.06}, "seed": 3})";
  const auto r = run({"attack", "grp-auth", "--config", cfg, "--corpus", corpus, "--seed", "9"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["config"]["seed"], 9);
  EXPECT_EQ(j["config"]["params"]["m"], 20);
}

TEST_F(Cli, EvalPrintsRates) {
  const auto corpus = small_corpus();
  const auto r = run({"eval", "--corpus", corpus, "--metric", "euclidean", "--threshold", "0.33"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j.contains("eer"));
  EXPECT_TRUE(j.contains("fmr"));
}

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, cli::kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"attack", "grp-nope"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"verify", "--a", "x.csv"}).code, cli::kExitUsage);
  const auto corpus = small_corpus();
  const auto r = run({"attack", "urp-auth", "--corpus", corpus, "--k", "4", "--m", "5", "--p", "3"});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_EQ(error_line(r.err)["error"]["kind"], "Unsupported");
}

TEST_F(Cli, DataErrorsExitThree) {
  const auto r = run({"attack", "grp-auth", "--corpus", path("missing.csv")});
  EXPECT_EQ(r.code, cli::kExitData);
  const auto j = error_line(r.err);
  EXPECT_EQ(j["error"]["exit_code"], 3);
  EXPECT_EQ(j["error"]["kind"], "Io");
  const auto bad = path("bad.csv");
  std::ofstream(bad) << "user_id,sample_id,f1\nu,1,abc\n";
  EXPECT_EQ(run({"attack", "grp-auth", "--corpus", bad, "--k", "1", "--m", "1"}).code, cli::kExitData);
}

TEST_F(Cli, SolverFailuresExitFour) {
  const auto corpus = small_corpus();
  const auto r = run({"attack", "grp-auth", "--corpus", corpus, "--k", "4", "--m", "20", "--max-iter", "1"});
  EXPECT_EQ(r.code, cli::kExitSolver) << r.err;
}
