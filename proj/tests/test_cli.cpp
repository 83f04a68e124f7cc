#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("tcsde_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    write("small.json", R"({"T": 5, "l_min": 1, "l_max": 2, "particles": 8, "p_cap": 2, "p_tail_max": 2})");
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }

  std::string read(const std::string& name) const {
    std::ifstream in(path(name));
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  int run(const std::string& args) const {
    const std::string cmd = std::string(TCSDE_CLI_PATH) + " " + args + " > " + path("stdout.txt") + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, SimulateIsDeterministicForAFixedSeed) {
  ASSERT_EQ(run("simulate --config " + path("small.json") + " --seed 5 --out " + path("a.csv")), 0);
  ASSERT_EQ(run("simulate --config " + path("small.json") + " --seed 5 --out " + path("b.csv")), 0);
  ASSERT_EQ(run("simulate --config " + path("small.json") + " --seed 6 --out " + path("c.csv")), 0);
  EXPECT_EQ(read("a.csv"), read("b.csv"));
  EXPECT_NE(read("a.csv"), read("c.csv"));
  const std::string text = read("a.csv");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 6);
}

TEST_F(CliTest, ScoreEstimateReportIsReproducibleWithoutTiming) {
  ASSERT_EQ(run("simulate --config " + path("small.json") + " --seed 5 --out " + path("d.csv")), 0);
  const std::string common = "score-estimate --config " + path("small.json") + " --seed 9 --input " + path("d.csv") +
                             " --replicates 3 --omit-timing --out ";
  ASSERT_EQ(run(common + path("r1.json")), 0);
  ASSERT_EQ(run(common + path("r2.json")), 0);
  EXPECT_EQ(read("r1.json"), read("r2.json"));
  EXPECT_EQ(read("r1_draws.csv"), read("r2_draws.csv"));

  const auto report = json::parse(read("r1.json"));
  EXPECT_EQ(report["schema_version"], 1);
  EXPECT_EQ(report["command"], "score-estimate");
  EXPECT_EQ(report["seed"], 9);
  EXPECT_EQ(report["config"]["T"], 5);
  EXPECT_EQ(report["draws"].size(), 3u);
  EXPECT_FALSE(report["draws"][0].contains("wall_ns"));
}

TEST_F(CliTest, BayesEstimateWithExplicitLevels) {
  ASSERT_EQ(run("simulate --config " + path("small.json") + " --seed 5 --out " + path("d.csv")), 0);
  ASSERT_EQ(run("bayes-estimate --config " + path("small.json") + " --input " + path("d.csv") +
                " --levels 1 --iters 20,10 --omit-timing --out " + path("b.json")),
            0);
  const auto report = json::parse(read("b.json"));
  ASSERT_EQ(report["levels"].size(), 2u);
  EXPECT_EQ(report["levels"][0]["iters"], 20);
  EXPECT_EQ(report["levels"][1]["iters"], 10);
  EXPECT_EQ(report["posterior_mean"].size(), 2u);
}

TEST_F(CliTest, IngestAndAnalyze) {
  std::string csv = "Date,Open,Close\n";
  double price = 100.0;
  for (int d = 1; d <= 28; ++d) {
    price *= d % 3 == 0 ? 0.99 : 1.012;
    csv += "2022-02-" + std::string(d < 10 ? "0" : "") + std::to_string(d) + ",0," + std::to_string(price) + "\n";
  }
  write("prices.csv", csv);
  ASSERT_EQ(run("ingest --input " + path("prices.csv") + " --start 2022-02-01 --end 2022-02-28 --out " +
                path("returns.csv")),
            0);
  ASSERT_EQ(run("analyze --input " + path("returns.csv") + " --acf-lags 5 --out " + path("an.json")), 0);
  const auto report = json::parse(read("an.json"));
  EXPECT_EQ(report["command"], "analyze");
  EXPECT_TRUE(fs::exists(path("an_acf.csv")));
}

TEST_F(CliTest, ErrorCategoriesMapToExitCodes) {
  write("bad.json", R"({"bogus": 1, "alpha": 3})");
  EXPECT_EQ(run("simulate --config " + path("bad.json") + " --out " + path("x.csv")), 6);
  const std::string out = read("stdout.txt");
  EXPECT_NE(out.find("bogus"), std::string::npos);
  EXPECT_NE(out.find("alpha"), std::string::npos);

  EXPECT_EQ(run("analyze --input " + path("missing.csv") + " --out " + path("a.json")), 7);

  write("garbage.csv", "k,y\n1,abc\n");
  EXPECT_EQ(run("analyze --input " + path("garbage.csv") + " --out " + path("a.json")), 5);
}
