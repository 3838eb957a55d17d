#include "rbench/cli.hpp"
#include "rbench/report.hpp"

#include "json.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace rbench {
namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "rbench");
  std::ostringstream out, err;
  const int code = cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

class CliTest : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           (std::string("rbench_cli_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Report with one benchmark "b" whose minimum is min_ns.
  std::string report_with_min(const std::string& name, double min_ns, const std::string& id = "b") const {
    BenchmarkRecord record;
    record.id = id;
    record.n_execs = 1;
    const auto t = nanoseconds{static_cast<std::int64_t>(min_ns)};
    record.trials = {Trial{{{t, 1}, {t * 2, 1}}, 0}};
    record.estimates = pooled_estimates(record.trials, 1);
    BenchmarkReport report;
    report.records = {record};
    write_report(path(name), report);
    return path(name);
  }

  fs::path dir_;
};

TEST_F(CliTest, CompareExitCodes) {
  const auto base = report_with_min("base.json", 100);
  EXPECT_EQ(run_cli({"compare", base, report_with_min("c130.json", 130)}).code, kExitRegression);
  EXPECT_EQ(run_cli({"compare", base, report_with_min("c129.json", 129)}).code, kExitOk);
  EXPECT_EQ(run_cli({"compare", base, report_with_min("c70.json", 70)}).code, kExitOk);
  EXPECT_EQ(run_cli({"compare", base, path("c129.json"), "--threshold", "0.2"}).code, kExitRegression);
}

TEST_F(CliTest, CompareJson) {
  const auto base = report_with_min("base.json", 100);
  const auto result = run_cli({"compare", base, report_with_min("c70.json", 70), "--json"});
  ASSERT_EQ(result.code, kExitOk) << result.err;
  const auto doc = nlohmann::json::parse(result.out);
  EXPECT_EQ(doc.at("regressions"), 0);
  ASSERT_EQ(doc.at("results").size(), 1u);
  EXPECT_EQ(doc.at("results")[0].at("verdict"), "improvement");
  EXPECT_DOUBLE_EQ(doc.at("results")[0].at("ratio").get<double>(), 0.7);
}

TEST_F(CliTest, CompareReportsUnmatched) {
  const auto base = report_with_min("base.json", 100, "a");
  const auto result = run_cli({"compare", base, report_with_min("other.json", 100, "z"), "--json"});
  EXPECT_EQ(result.code, kExitOk);
  const auto doc = nlohmann::json::parse(result.out);
  EXPECT_EQ(doc.at("unmatched"), (nlohmann::json{"z", "a"}));
}

TEST_F(CliTest, CompareMissingFile) {
  const auto result = run_cli({"compare", path("nope.json"), path("nope2.json")});
  EXPECT_EQ(result.code, kExitError);
  EXPECT_NE(result.err.find("nope.json"), std::string::npos);
}

TEST_F(CliTest, SimulateIsDeterministic) {
  const std::string scenario = std::string(RBENCH_TEST_DATA) + "/small_scenario.json";
  ASSERT_EQ(run_cli({"simulate", scenario, "--output", path("a.json"), "--kde"}).code, kExitOk);
  ASSERT_EQ(run_cli({"simulate", scenario, "--output", path("b.json"), "--kde"}).code, kExitOk);
  ASSERT_EQ(run_cli({"simulate", scenario, "--seed", "43", "--output", path("c.json")}).code, kExitOk);
  EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
  const auto a = read_report(path("a.json"));
  const auto c = read_report(path("c.json"));
  EXPECT_EQ(a.kind, "simulate");
  EXPECT_EQ(a.seed, 42u);
  EXPECT_EQ(c.seed, 43u);
  ASSERT_EQ(a.records.size(), 1u);
  EXPECT_EQ(a.records[0].trials.size(), 5u);
  EXPECT_TRUE(a.records[0].density);
  EXPECT_NE(a.records[0].trials, c.records[0].trials);
}

TEST_F(CliTest, CalibrateJson) {
  const auto result = run_cli({"calibrate", "--json", "--tau-prec-ns", "4", "--tau-acc-ns", "2000"});
  ASSERT_EQ(result.code, kExitOk) << result.err;
  const auto doc = nlohmann::json::parse(result.out);
  EXPECT_EQ(doc.at("tau_prec_ns"), 4);
  EXPECT_EQ(doc.at("tau_acc_ns"), 2000);
  EXPECT_EQ(doc.at("j"), 500);
  EXPECT_EQ(doc.at("source"), "configured");

  const auto measured = run_cli({"calibrate", "--json"});
  ASSERT_EQ(measured.code, kExitOk) << measured.err;
  const auto m = nlohmann::json::parse(measured.out);
  EXPECT_GT(m.at("tau_prec_ns").get<std::int64_t>(), 0);
  EXPECT_EQ(m.at("source"), "measured");
}

TEST_F(CliTest, OracleCheckExitCodes) {
  const std::vector<std::string> timer{"--tau-prec-ns", "1", "--tau-acc-ns", "1000"};
  auto with_timer = [&](std::vector<std::string> args) {
    args.insert(args.end(), timer.begin(), timer.end());
    return run_cli(args);
  };
  EXPECT_EQ(with_timer({"oracle", "--check"}).code, kExitOk);
  EXPECT_EQ(with_timer({"oracle", "--check", "--default-table"}).code, kExitOk);
  // Outside the parameter ranges unless explicitly allowed, then failing property 3.
  EXPECT_EQ(with_timer({"oracle", "--check", "--params", "0.001,0.5"}).code, kExitError);
  const auto loose = with_timer({"oracle", "--check", "--params", "0.001,0.5", "--no-range-check"});
  EXPECT_EQ(loose.code, kExitError);
  EXPECT_NE(loose.out.find("[FAIL] 3"), std::string::npos) << loose.out;

  const auto emitted = with_timer({"oracle", "--emit-table"});
  ASSERT_EQ(emitted.code, kExitOk);
  std::ofstream(path("table.json")) << emitted.out;
  EXPECT_EQ(with_timer({"oracle", "--check", "--table", path("table.json")}).code, kExitOk);
  std::ofstream(path("bad.json")) << "[[1, 1000], [2, 1]]";
  EXPECT_EQ(with_timer({"oracle", "--check", "--table", path("bad.json")}).code, kExitError);
}

TEST_F(CliTest, TuneThenRunUsesCache) {
  const auto cache = path("cache.json");
  const std::vector<std::string> timer{"--tau-prec-ns", "20", "--tau-acc-ns", "20000"};
  std::vector<std::string> tune_args{"tune", "builtin:branchsum", "--cache", cache, "--tuning-budget-s", "0.05"};
  tune_args.insert(tune_args.end(), timer.begin(), timer.end());
  const auto tuned = run_cli(tune_args);
  ASSERT_EQ(tuned.code, kExitOk) << tuned.err;
  EXPECT_NE(tuned.out.find("tuned branchsum"), std::string::npos);

  std::vector<std::string> run_args{"run", "builtin:branchsum", "--cache", cache, "--budget-s", "0.05",
                                    "--output", path("run.json"), "--trials", "2", "--per-trial", "50", "--kde"};
  run_args.insert(run_args.end(), timer.begin(), timer.end());
  const auto ran = run_cli(run_args);
  ASSERT_EQ(ran.code, kExitOk) << ran.err;
  // Cache hit: no retuning.
  EXPECT_EQ(ran.out.find("tuned branchsum"), std::string::npos) << ran.out;

  const auto report = read_report(path("run.json"));
  ASSERT_EQ(report.records.size(), 1u);
  const auto& record = report.records[0];
  EXPECT_EQ(record.id, "branchsum");
  ASSERT_TRUE(record.tune);
  EXPECT_EQ(record.n_execs, record.tune->n);
  EXPECT_TRUE(record.density);
  EXPECT_TRUE(report.machine);
  EXPECT_EQ(recompute_estimates(record), record.estimates);
}

TEST_F(CliTest, MissingCacheIsAnError) {
  ::unsetenv("RBENCH_CACHE");
  const auto result = run_cli({"tune", "builtin:branchsum", "--tau-prec-ns", "20"});
  EXPECT_EQ(result.code, kExitError);
  EXPECT_NE(result.err.find("RBENCH_CACHE"), std::string::npos);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run_cli({}).code, kExitError);
  EXPECT_EQ(run_cli({"frobnicate"}).code, kExitError);
  EXPECT_EQ(run_cli({"run", "builtin:all"}).code, kExitError);
  EXPECT_EQ(run_cli({"--help"}).code, kExitOk);
}

TEST(CliBinary, ExitCodePropagates) {
  const std::string cmd = std::string(RBENCH_CLI_PATH) + " compare /nonexistent/a.json /nonexistent/b.json 2>/dev/null";
  const int status = std::system(cmd.c_str());
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 1);
}

}  // namespace
}  // namespace rbench
