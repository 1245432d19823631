#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string scenario(const char* name) { return std::string(OFSMPC_SCENARIO_DIR) + "/" + name; }

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ofsmpc_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run(const std::string& args, const fs::path& out) {
  const std::string cmd = std::string(OFSMPC_CLI) + " " + args + " --out " + out.string() + " > " +
                          (out / "stdout.txt").string() + " 2> " + (out / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, SynthWritesDump) {
  const fs::path out = scratch("synth");
  EXPECT_EQ(run("synth --config " + scenario("reduced_noise.json"), out), 0);
  const std::string dump = slurp(out / "synthesis.txt");
  EXPECT_NE(dump.find("hpolytope Xf_RF"), std::string::npos);
  EXPECT_NE(dump.find("zonotope E_n"), std::string::npos);
}

TEST(Cli, ConfigErrorsExitTwo) {
  const fs::path out = scratch("config");
  EXPECT_EQ(run("synth --config /nonexistent.json", out), 2);
  std::ofstream(out / "bad.json") << R"({"system": {}, "extra": 1})";
  EXPECT_EQ(run("synth --config " + (out / "bad.json").string(), out), 2);
  EXPECT_EQ(run("montecarlo --config " + scenario("reduced_noise.json") + " --controller other", out), 2);
}

TEST(Cli, EmptySetExitsThreeNamingStage) {
  const fs::path out = scratch("empty");
  std::string text = slurp(scenario("reduced_noise.json"));
  const std::string from = "\"U\": {\"lower\": [-5.0], \"upper\": [5.0]}";
  ASSERT_NE(text.find(from), std::string::npos);
  text.replace(text.find(from), from.size(), "\"U\": {\"lower\": [-0.01], \"upper\": [0.01]}");
  std::ofstream(out / "tight.json") << text;
  EXPECT_EQ(run("synth --config " + (out / "tight.json").string(), out), 3);
  EXPECT_NE(slurp(out / "stderr.txt").find("input_tightening"), std::string::npos);
}

TEST(Cli, SimulateAndMonteCarloOutputs) {
  const fs::path out = scratch("sim");
  EXPECT_EQ(run("simulate --config " + scenario("reduced_noise.json") + " --seed 4", out), 0);
  EXPECT_TRUE(fs::exists(out / "trace_proposed_seed4.csv"));
  EXPECT_NE(slurp(out / "stdout.txt").find("outcome = success"), std::string::npos);

  EXPECT_EQ(run("montecarlo --config " + scenario("example.json") + " --controller baseline --runs 50", out), 0);
  const std::string report = slurp(out / "report_baseline.txt");
  EXPECT_NE(report.find("controller = baseline"), std::string::npos);
  EXPECT_NE(report.find("theoretical_failure_bound = "), std::string::npos);
  EXPECT_TRUE(fs::exists(out / "report_baseline.csv"));
}

TEST(Cli, VerifyReportsAssumptionFailure) {
  const fs::path out = scratch("verify");
  std::string text = slurp(scenario("reduced_noise.json"));
  const std::string from = "\"Sigma0\": [[0.001, 0.0], [0.0, 0.001]]";
  ASSERT_NE(text.find(from), std::string::npos);
  text.replace(text.find(from), from.size(), "\"Sigma0\": [[1.0, 0.0], [0.0, 1.0]]");
  std::ofstream(out / "big_sigma.json") << text;
  EXPECT_EQ(run("verify --config " + (out / "big_sigma.json").string(), out), 4);
  EXPECT_NE(slurp(out / "stdout.txt").find("FAIL assumptions"), std::string::npos);
}
