#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + ABC_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string config(const std::string& name) { return std::string("\"") + ABC_CONFIG_DIR + "/" + name + "\""; }

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("abc_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const std::string kTiny = " --uct-iters 40 --episodes 3 --generations 2 --epochs 2 --seed 5";

TEST(Cli, NoSubcommandOrUnknownFlagIsUsageError) {
  EXPECT_EQ(run_cli(""), 1);
  EXPECT_EQ(run_cli("run --config " + config("two_robots.ini") + " --bogus"), 1);
  EXPECT_EQ(run_cli("run"), 1);
}

TEST(Cli, MissingOrInvalidConfigExitsOne) {
  const auto dir = fresh_dir("missing");
  EXPECT_EQ(run_cli("run --config /nonexistent/none.ini --out " + dir.string()), 1);
  fs::create_directories(dir);
  std::ofstream(dir / "bad.ini") << "[grid]\nwidth = -3\n";
  EXPECT_EQ(run_cli("run --config " + (dir / "bad.ini").string() + " --out " + (dir / "out").string()), 1);
  fs::remove_all(dir);
}

TEST(Cli, InvalidArgumentExitsOne) {
  const auto dir = fresh_dir("badarg");
  EXPECT_EQ(run_cli("run --config " + config("two_robots.ini") + " --exploration 0 --out " + dir.string()), 1);
  EXPECT_EQ(run_cli("oracle --suite nonsense"), 1);
  fs::remove_all(dir);
}

TEST(Cli, RunIsByteReproducible) {
  const auto a = fresh_dir("det_a"), b = fresh_dir("det_b");
  ASSERT_EQ(run_cli("run --config " + config("two_robots.ini") + kTiny + " --out " + a.string()), 0);
  ASSERT_EQ(run_cli("run --config " + config("two_robots.ini") + kTiny + " --threads 2 --out " + b.string()), 0);
  for (const char* f : {"summary.csv", "plot_data.csv", "config_resolved.ini", "gen0/model_agent1.abcnn",
                        "gen0/model_agent2.abcnn", "gen1/model_agent1.abcnn", "gen1/model_agent2.abcnn"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Cli, ResolvedConfigReproducesTheRun) {
  const auto a = fresh_dir("resolved_a"), b = fresh_dir("resolved_b");
  ASSERT_EQ(run_cli("run --config " + config("two_robots.ini") + kTiny + " --out " + a.string()), 0);
  ASSERT_EQ(run_cli("run --config " + (a / "config_resolved.ini").string() + " --out " + b.string()), 0);
  EXPECT_EQ(slurp(a / "summary.csv"), slurp(b / "summary.csv"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Cli, SummarizeRecomputesSummary) {
  const auto a = fresh_dir("summarize");
  ASSERT_EQ(run_cli("run --config " + config("two_robots.ini") + kTiny + " --out " + a.string()), 0);
  const std::string summary = slurp(a / "summary.csv"), plot = slurp(a / "plot_data.csv");
  fs::remove(a / "summary.csv");
  fs::remove(a / "plot_data.csv");
  ASSERT_EQ(run_cli("summarize --results " + a.string()), 0);
  EXPECT_EQ(slurp(a / "summary.csv"), summary);
  EXPECT_EQ(slurp(a / "plot_data.csv"), plot);
  EXPECT_EQ(run_cli("summarize --results /nonexistent/results"), 1);
  fs::remove_all(a);
}

TEST(Cli, OracleSuitesPass) {
  EXPECT_EQ(run_cli("oracle --suite lemma1"), 0);
  EXPECT_EQ(run_cli("oracle --suite corollary1"), 0);
}

}  // namespace
