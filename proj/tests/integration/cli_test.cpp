#include <gtest/gtest.h>

#include <filesystem>
#include <map>
#include <set>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <unistd.h>

#include "synthetic.hpp"
#include "uuaudit/io.hpp"
#include "uuaudit/oracle.hpp"
#include "uuaudit/search.hpp"
#include "uuaudit/service/cli.hpp"

using namespace uuaudit;
namespace ut = uuaudit::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "uuaudit");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("uuaudit-cli-" + std::string(::testing::UnitTest::GetInstance()
                                             ->current_test_info()
                                             ->name()) +
            "-" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    data_ = ut::planted_high_pool(600, 91);
    write_testset(csv(), data_, DataFormat::csv);
    write_testset(dir_ / "data.jsonl", data_, DataFormat::jsonl);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string csv() const { return (dir_ / "data.csv").string(); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
  AuditData data_ = ut::planted_high_pool(1, 1);
};

}  // namespace

TEST_F(CliTest, SearchWritesTraceMatchingLibrary) {
  const Outcome r = run_cli({"search", "--strategy", "fl", "--budget", "100", "--seed", "7",
                             "--out", path("t.jsonl"), csv()});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string text = slurp(path("t.jsonl"));
  EXPECT_LE(count_lines(text), 100u);
  EXPECT_GT(count_lines(text), 0u);
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    for (const char* k : {"b", "id", "c", "phi", "label", "is_uu", "W", "gain"})
      EXPECT_TRUE(j.contains(k)) << k;
  }
  EXPECT_TRUE(fs::exists(path("t.jsonl.meta.json")));

  SearchConfig cfg;
  cfg.budget = 100;
  cfg.seed = 7;
  const AuditData reloaded = load_testset(csv());
  SimulatedOracle oracle(reloaded);
  std::ostringstream lib;
  write_trace_jsonl(lib, run_search(reloaded.set, oracle, cfg));
  EXPECT_EQ(text, lib.str());

  const Outcome again = run_cli({"search", "--strategy", "fl", "--budget", "100", "--seed",
                                 "7", csv()});
  EXPECT_EQ(again.code, 0);
  EXPECT_EQ(again.out, text);
}

TEST_F(CliTest, SearchReadsJsonl) {
  const Outcome a = run_cli({"search", "--strategy", "bandit", "--budget", "20", csv()});
  const Outcome b = run_cli({"search", "--strategy", "bandit", "--budget", "20",
                             "--input-format", "jsonl", path("data.jsonl")});
  ASSERT_EQ(a.code, 0);
  ASSERT_EQ(b.code, 0);
  EXPECT_EQ(a.out, b.out);
}

TEST_F(CliTest, MonteCarloContract) {
  const std::vector<std::string> args{"mc", "--reps", "50", "--n", "500", "--budget", "50",
                                      "--strategies", "fl,mu,cov,bandit", "--seed", "3",
                                      "--out", path("mc.csv"), "--json", path("mc.json"), csv()};
  const Outcome r = run_cli(args);
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string first = slurp(path("mc.csv"));
  std::istringstream in(first);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "step,strategy,metric,median,q05,q95,reps");
  std::map<std::string, std::set<std::string>> steps;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string step, strategy, metric;
    std::getline(row, step, ',');
    std::getline(row, strategy, ',');
    std::getline(row, metric, ',');
    steps[strategy + "/" + metric].insert(step);
  }
  for (const char* s : {"fl", "mu", "cov", "bandit"})
    EXPECT_EQ(steps[std::string(s) + "/uus"].size(), 50u) << s;
  const std::string json_first = slurp(path("mc.json"));
  ASSERT_EQ(run_cli(args).code, 0);
  EXPECT_EQ(slurp(path("mc.csv")), first);
  EXPECT_EQ(slurp(path("mc.json")), json_first);

  const Outcome g = run_cli({"report", "--mc", path("mc.json"), "--format", "gnuplot",
                             "--metric", "sdr"});
  ASSERT_EQ(g.code, 0) << g.err;
  EXPECT_EQ(count_lines(g.out), 2u + 50u);
  const Outcome c = run_cli({"report", "--mc", path("mc.json"), "--format", "csv"});
  EXPECT_EQ(c.out, first);
}

TEST_F(CliTest, ProfileOutputs) {
  const Outcome j = run_cli({"profile", csv()});
  ASSERT_EQ(j.code, 0) << j.err;
  const auto doc = nlohmann::json::parse(j.out);
  EXPECT_EQ(doc["grid"].size(), 101u);
  EXPECT_EQ(doc["estimated_accuracy"].size(), 101u);
  const Outcome c = run_cli({"profile", "--format", "csv", "--smoother", "binned", csv()});
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_EQ(count_lines(c.out), 102u);
  EXPECT_EQ(c.out.substr(0, c.out.find('\n')),
            "confidence,estimated_accuracy,overconfidence,support");
}

TEST_F(CliTest, ReportOnTraces) {
  ASSERT_EQ(run_cli({"search", "--strategy", "mu", "--budget", "30", "--out", path("a.jsonl"),
                     csv()}).code, 0);
  ASSERT_EQ(run_cli({"search", "--strategy", "cov", "--budget", "30", "--out",
                     path("b.jsonl"), csv()}).code, 0);
  const Outcome r = run_cli({"report", path("a.jsonl"), path("b.jsonl"), "--data", csv()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  ASSERT_EQ(doc["traces"].size(), 2u);
  EXPECT_EQ(doc["traces"][0]["facility_gain"].size(), 30u);
  EXPECT_TRUE(doc.contains("sdr_summary"));
  const Outcome c = run_cli({"report", path("a.jsonl"), "--format", "csv"});
  ASSERT_EQ(c.code, 0);
  EXPECT_EQ(count_lines(c.out), 31u);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"search", "--no-such-flag", csv()}).code, 2);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
  EXPECT_EQ(run_cli({"search", "--budget", "abc", csv()}).code, 2);
  const Outcome missing = run_cli({"search", path("absent.csv")});
  EXPECT_EQ(missing.code, 1);
  EXPECT_FALSE(missing.err.empty());
  EXPECT_EQ(run_cli({"search", "--budget", "601", csv()}).code, 1);

  std::ofstream(path("bad.csv")) << "id,f0,confidence,predicted_class\nrow7,1,1.3,pos\n";
  const Outcome bad = run_cli({"search", "--budget", "1", path("bad.csv")});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("row7"), std::string::npos) << bad.err;

  std::ofstream(path("nolabel.csv")) << "id,f0,confidence,predicted_class\n"
                                        "r1,1,0.7,pos\nr2,2,0.8,neg\n";
  const Outcome nolabel = run_cli({"search", "--budget", "1", path("nolabel.csv")});
  EXPECT_EQ(nolabel.code, 1);
  EXPECT_NE(nolabel.err.find("r1"), std::string::npos) << nolabel.err;
}
