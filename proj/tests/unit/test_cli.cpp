// Runs the installed `homing` binary as a subprocess.
#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string output;  // stdout and stderr combined
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(HOMING_CLI_PATH) + " " + args + " 2>&1";
  RunResult r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe)) r.output += buf;
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "homing_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int count_lines(const fs::path& p) {
  std::ifstream is(p);
  int n = 0;
  for (std::string line; std::getline(is, line);) ++n;
  return n;
}

}  // namespace

TEST(Cli, HelpExitsZero) {
  const RunResult r = run("--help");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.output.find("train"), std::string::npos);
}

TEST(Cli, UnknownSubcommandIsUsageError) {
  EXPECT_EQ(run("fly").code, 9);
  EXPECT_EQ(run("eval --preset table99").code, 9);
}

TEST(Cli, SmokeTrainWritesCurve) {
  const fs::path dir = fresh_dir("train");
  const fs::path cfg = dir / "cfg.json";
  std::ofstream(cfg) << R"({"ppo": {"episodes_per_batch": 4}})";
  const RunResult r = run("train --config " + cfg.string() + " --batches 2 --quiet --out " + dir.string());
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(count_lines(dir / "learning_curve.csv"), 3);
  EXPECT_TRUE(fs::exists(dir / "policy_last.ckpt"));
  EXPECT_TRUE(fs::exists(dir / "resolved_config.json"));
}

TEST(Cli, MissingConfigNamesPath) {
  const RunResult r = run("train --config /nonexistent/run.json --batches 1");
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.output.find("/nonexistent/run.json"), std::string::npos) << r.output;
}

TEST(Cli, SeedOverrideReachesProvenance) {
  const fs::path dir = fresh_dir("seed");
  ASSERT_EQ(run("eval --preset zero-error --episodes 2 --seed 5 --out " + dir.string()).code, 0);
  ASSERT_EQ(run("eval --preset zero-error --episodes 2 --seed 6 --out " + dir.string()).code, 0);
  const std::string a = slurp(dir / "provenance" / "report_zem_zero-error_s5.json");
  const std::string b = slurp(dir / "provenance" / "report_zem_zero-error_s6.json");
  EXPECT_NE(a.find("\"seed\": 5"), std::string::npos) << a;
  EXPECT_NE(b.find("\"seed\": 6"), std::string::npos) << b;
}

TEST(Cli, ZeroErrorEvalHitsAndCompareIsIdempotent) {
  const fs::path dir = fresh_dir("eval");
  const RunResult r = run("eval --preset zero-error --episodes 20 --seed 3 --out " + dir.string());
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("<100cm(%)"), std::string::npos);
  EXPECT_TRUE(std::regex_search(r.output, std::regex(R"(zem +zero-error +20 +100\.0 +100\.0)")))
      << r.output;
  ASSERT_EQ(run("eval --preset zero-error --guidance pn --episodes 20 --seed 3 --out " + dir.string()).code, 0);

  const std::string reports = (dir / "report_zem_zero-error_s3.json").string() + " " +
                              (dir / "report_pn_zero-error_s3.json").string();
  const RunResult c1 = run("compare " + reports + " --out " + (dir / "c1.csv").string());
  const RunResult c2 = run("compare " + reports + " --out " + (dir / "c2.csv").string());
  ASSERT_EQ(c1.code, 0) << c1.output;
  EXPECT_EQ(c1.output.substr(0, c1.output.find("wrote")), c2.output.substr(0, c2.output.find("wrote")));
  EXPECT_EQ(slurp(dir / "c1.csv"), slurp(dir / "c2.csv"));
  EXPECT_EQ(count_lines(dir / "c1.csv"), 3);
  EXPECT_EQ(run("compare " + (dir / "report_zem_zero-error_s3.json").string()).code, 9);
}

TEST(Cli, CompareWarnsOnMixedPresets) {
  const fs::path dir = fresh_dir("mixed");
  ASSERT_EQ(run("eval --preset table5 --episodes 2 --out " + dir.string()).code, 0);
  ASSERT_EQ(run("eval --preset table6 --episodes 2 --out " + dir.string()).code, 0);
  const RunResult r = run("compare " + (dir / "report_zem_table5_s1.json").string() + " " +
                          (dir / "report_zem_table6_s1.json").string());
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.output.find("warning: "), std::string::npos) << r.output;
}

TEST(Cli, DumpIsDeterministic) {
  const fs::path a = fresh_dir("dump_a"), b = fresh_dir("dump_b");
  ASSERT_EQ(run("dump --preset table5 --episode 4 --seed 2 --out " + a.string()).code, 0);
  ASSERT_EQ(run("dump --preset table5 --episode 4 --seed 2 --out " + b.string()).code, 0);
  const std::string name = "trajectory_zem_table5_s2_e4.csv";
  const std::string ta = slurp(a / name);
  ASSERT_FALSE(ta.empty());
  EXPECT_EQ(ta, slurp(b / name));
  EXPECT_EQ(ta.substr(0, ta.find('\n')),
            "step,time,x,y,z,theta_u,theta_v,d_theta_u,d_theta_v,thr1,thr2,thr3,thr4,mass,theta_cv,range");
}

TEST(Cli, RlWithoutCheckpointFails) {
  const fs::path dir = fresh_dir("rl");
  const RunResult r = run("eval --guidance rl --checkpoint " + (dir / "none.ckpt").string() +
                          " --episodes 1 --out " + dir.string());
  EXPECT_EQ(r.code, 2) << r.output;
  EXPECT_NE(r.output.find("error: "), std::string::npos);
}
