#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

namespace fs = std::filesystem;
using clusterlab::json;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "clusterlab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = clusterlab::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("clusterlab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& content) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << content;
    return p;
  }

  fs::path dir_;
};

const char* kUrnConfig = R"({
  "spec": {"model": "urn", "g": 4995, "y": 4995, "r_balls": 10},
  "estimation": {"run_gap": 1, "n_conditional_samples": 100000, "window_u": 1, "window_v": 1},
  "simulate": {"length": 2000, "summary": true}
})";

}  // namespace

TEST_F(CliTest, CalculusUniformExample) {
  const fs::path pmf = write("uniform012.json", R"({"offset":0,"probs":[0.3333333333333333,0.3333333333333333,0.3333333333333334]})");
  const Result r = run_cli({"calculus", "--pmf", pmf.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_NEAR(j["theta"].get<double>(), 1.0 / 3, 1e-12);
  EXPECT_NEAR(j["e_typical"].get<double>(), 3.0, 1e-12);
  EXPECT_NEAR(j["e_inspected"].get<double>(), 3.0, 1e-12);
  EXPECT_TRUE(j["all_passed"].get<bool>());
}

TEST_F(CliTest, CalculusFromConfigWritesCsv) {
  write("geo.json", R"({"offset":0,"probs":[0.5,0.25,0.125,0.0625,0.0625]})");
  const fs::path cfg = write("cfg.json", R"({"calculus_input":"geo.json","format":"both","output_dir":"out"})");
  const Result r = run_cli({"--config", cfg.string(), "calculus"});
  EXPECT_EQ(r.code, 0) << r.err;
  for (const char* f : {"report.json", "checks.csv", "side_pmf.csv", "inspected_pmf.csv", "typical_pmf.csv"}) {
    EXPECT_TRUE(fs::exists(dir_ / "out" / f)) << f;
  }
  EXPECT_EQ(slurp(dir_ / "out" / "typical_pmf.csv").substr(0, 14), "k,prob,stderr\n");
}

TEST_F(CliTest, CalculusNonMonotoneIsInputError) {
  const fs::path pmf = write("bad.json", R"({"offset":0,"probs":[0.2,0.8]})");
  const Result r = run_cli({"calculus", "--pmf", pmf.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("NotMonotone"), std::string::npos);
}

TEST_F(CliTest, VerifyIidLawAllZero) {
  const fs::path law = write("iid_p05.json", R"({"u":1,"v":1,"source":"exact",
    "entries":{"010":0.25,"011":0.25,"110":0.25,"111":0.25}})");
  const Result r = run_cli({"verify", "--law", law.string(), "--max-set-size", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "identity_name,context,residual,tolerance,passed");
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    EXPECT_NE(line.find("\",0,1e-12,true"), std::string::npos) << line;
  }
  EXPECT_GT(rows, 10);
}

TEST_F(CliTest, VerifyNonStationaryLawFails) {
  const fs::path law = write("bad.json", R"({"u":1,"v":1,"entries":{"011":1}})");
  const fs::path out = dir_ / "v";
  const Result r = run_cli({"--output", out.string(), "--format", "both", "verify", "--law", law.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(fs::exists(out / "verify.csv"));
  EXPECT_FALSE(json::parse(slurp(out / "verify.json"))["all_passed"].get<bool>());
}

TEST_F(CliTest, AnalyzeIsByteIdenticalAcrossRunsAndThreads) {
  const fs::path cfg = write("urn.json", kUrnConfig);
  const Result a = run_cli({"--config", cfg.string(), "--output", (dir_ / "a").string(), "--format", "both",
                            "--threads", "1", "analyze"});
  const Result b = run_cli({"--config", cfg.string(), "--output", (dir_ / "b").string(), "--format", "both",
                            "--threads", "3", "analyze"});
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  for (const char* f : {"report.json", "checks.csv", "side_pmf.csv", "inspected_pmf.csv", "typical_pmf.csv"}) {
    ASSERT_TRUE(fs::exists(dir_ / "a" / f)) << f;
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  }
  const json rep = json::parse(slurp(dir_ / "a" / "report.json"));
  EXPECT_NEAR(rep["theta"].get<double>(), 0.5, 0.02);
  EXPECT_EQ(rep["notes"].size(), 3U);
  EXPECT_EQ(rep["spec"]["model"], "urn");
}

TEST_F(CliTest, AnalyzeSeedChangesResult) {
  const fs::path cfg = write("urn.json", kUrnConfig);
  const Result a = run_cli({"--config", cfg.string(), "--seed", "1", "analyze"});
  const Result b = run_cli({"--config", cfg.string(), "--seed", "2", "analyze"});
  EXPECT_EQ(a.code, 0);
  EXPECT_NE(a.out, b.out);
  EXPECT_EQ(json::parse(a.out)["estimation"]["master_seed"], 1);
}

TEST_F(CliTest, SimulateSummaryAndPath) {
  const fs::path cfg = write("urn.json", kUrnConfig);
  const Result s = run_cli({"--config", cfg.string(), "simulate"});
  ASSERT_EQ(s.code, 0) << s.err;
  const json j = json::parse(s.out);
  EXPECT_EQ(j["length"], 2000);
  EXPECT_TRUE(j.contains("stationary_rate"));

  const fs::path cfg2 = write("mm.json", R"({"spec":{"model":"moving_maxima","r":3,"q":0.9,"seed":4},
    "simulate":{"length":500}})");
  const Result p1 = run_cli({"--config", cfg2.string(), "simulate"});
  const Result p2 = run_cli({"--config", cfg2.string(), "simulate"});
  const Result p3 = run_cli({"--config", cfg2.string(), "--seed", "5", "simulate"});
  EXPECT_EQ(p1.out.size(), 501U);
  EXPECT_EQ(p1.out, p2.out);
  EXPECT_NE(p1.out, p3.out);
  EXPECT_EQ(p1.out.find_first_not_of("01\n"), std::string::npos);
}

TEST_F(CliTest, ConfigErrorsExitTwoAndNameTheField) {
  const fs::path unknown = write("u.json", R"({"spec":{"model":"urn","g":1,"y":1,"r_balls":1},"estimaton":{}})");
  Result r = run_cli({"--config", unknown.string(), "analyze"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("'estimaton'"), std::string::npos) << r.err;

  const fs::path bad = write("b.json", R"({"spec":{"model":"moving_maxima","r":0,"q":0.9}})");
  r = run_cli({"--config", bad.string(), "simulate"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("'spec'"), std::string::npos) << r.err;

  const fs::path missing = write("m.json", R"({"verify_input":"nowhere.json"})");
  r = run_cli({"--config", missing.string(), "verify"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("verify_input"), std::string::npos) << r.err;

  EXPECT_EQ(run_cli({"analyze"}).code, 2);
  EXPECT_EQ(run_cli({"--config", (dir_ / "none.json").string(), "analyze"}).code, 2);
  EXPECT_EQ(run_cli({"--format", "xml", "demo"}).code, 2);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
  EXPECT_EQ(run_cli({}).code, 2);
}

TEST_F(CliTest, ThreadsEnvironmentFallback) {
  const fs::path cfg = write("urn.json", kUrnConfig);
  ::setenv("CLUSTERLAB_THREADS", "two", 1);
  EXPECT_EQ(run_cli({"--config", cfg.string(), "analyze"}).code, 2);
  ::setenv("CLUSTERLAB_THREADS", "2", 1);
  const Result a = run_cli({"--config", cfg.string(), "analyze"});
  ::unsetenv("CLUSTERLAB_THREADS");
  const Result b = run_cli({"--config", cfg.string(), "analyze"});
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
}

TEST_F(CliTest, DemoIsDeterministicAndCoversEveryOperation) {
  const Result a = run_cli({"--output", (dir_ / "a").string(), "--format", "both", "demo", "--seed", "42"});
  const Result b = run_cli({"--output", (dir_ / "b").string(), "--format", "both", "demo", "--seed", "42"});
  ASSERT_EQ(a.code, 0) << a.out;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(slurp(dir_ / "a" / "demo.json"), slurp(dir_ / "b" / "demo.json"));
  EXPECT_EQ(slurp(dir_ / "a" / "demo.csv"), slurp(dir_ / "b" / "demo.csv"));
  EXPECT_EQ(a.out.find("FAIL"), std::string::npos);

  const json j = json::parse(slurp(dir_ / "a" / "demo.json"));
  std::set<std::string> used;
  for (const auto& op : j["operations"]) used.insert(op.get<std::string>());
  for (std::string_view op : clusterlab::kPublicOperations) {
    EXPECT_TRUE(used.count(std::string(op))) << op;
  }
  std::set<std::string> examples;
  for (const auto& row : j["rows"]) examples.insert(row["example"].get<std::string>());
  EXPECT_EQ(examples, (std::set<std::string>{"moving_maxima r=1", "moving_maxima r=2", "moving_maxima r=3",
                                             "urn rho=0.5", "urn rho=0.9"}));
}

TEST_F(CliTest, HelpExitsZero) {
  const Result r = run_cli({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("analyze"), std::string::npos);
}
