#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "pmle/harness.hpp"
#include "pmle/io.hpp"

namespace pmle {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "pmle");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("pmle_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST_F(Cli, CatalogList) {
  const Result r = run({"catalog", "--list"});
  EXPECT_EQ(r.code, 0);
  std::istringstream lines(r.out);
  std::string first, line;
  std::getline(lines, first);
  int count = 1;
  while (std::getline(lines, line)) ++count;
  EXPECT_EQ(count, 72);
  EXPECT_EQ(first.rfind("I.1.1 ", 0), 0u);
  EXPECT_NE(first.find("p=2 d=2 n=200"), std::string::npos);
}

TEST_F(Cli, CatalogShow) {
  const Result r = run({"catalog", "--show", "I.2.1"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("weights=(0.3,0.7)"), std::string::npos);
  EXPECT_NE(r.out.find("means=(0,-3);(0,3)"), std::string::npos);
  const nlohmann::json doc = nlohmann::json::parse(r.out.substr(r.out.find('{')));
  EXPECT_EQ(doc["components"][1]["cov"], nlohmann::json::parse("[[1.0,0.0],[0.0,1.0]]"));

  const Result bad = run({"catalog", "--show", "X.9.9"});
  EXPECT_NE(bad.code, 0);
  EXPECT_NE(bad.err.find("X.9.9"), std::string::npos);
}

TEST_F(Cli, GenShapeAndDeterminism) {
  const fs::path a = dir_ / "a.csv", b = dir_ / "b.csv";
  const Result r = run({"gen", "--model", "I.2.1", "--n", "200", "--seed", "7", "--out", a.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(io::mixture_from_json(nlohmann::json::parse(r.out)), resolve_model(ModelSpec::parse("I.2.1")));
  ASSERT_EQ(run({"gen", "--model", "I.2.1", "--n", "200", "--seed", "7", "--out", b.string()}).code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  std::ifstream in(a);
  const Dataset data = io::read_csv(in);
  EXPECT_EQ(data.size(), 200u);
  EXPECT_EQ(data.dim(), 2u);

  const Result stdout_run = run({"gen", "--models", "III.1.1"});
  ASSERT_EQ(stdout_run.code, 0);
  std::istringstream csv(stdout_run.out);
  const Dataset d3 = io::read_csv(csv);
  EXPECT_EQ(d3.size(), 300u);
  EXPECT_EQ(d3.dim(), 3u);
  EXPECT_NE(stdout_run.err.find("\"order\": 2"), std::string::npos);

  const Result header = run({"gen", "--model", "I.1.1", "--n", "3", "--header"});
  EXPECT_EQ(header.out.rfind("x1,x2\n", 0), 0u);
}

TEST_F(Cli, GenRejectsBadInput) {
  EXPECT_EQ(run({"gen", "--model", "IX.1.1"}).code, 1);
  EXPECT_EQ(run({"gen", "--model", "I.1.1", "--n", "0"}).code, 1);
  EXPECT_EQ(run({"gen"}).code, 1);
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"bogus"}).code, 1);
}

TEST_F(Cli, FitSingleComponentMeanIsSampleMean) {
  const fs::path csv = dir_ / "d.csv";
  ASSERT_EQ(run({"gen", "--model", "I.2.4", "--seed", "3", "--out", csv.string()}).code, 0);
  const std::string before = slurp(csv);
  const Result r = run({"fit", csv.string(), "--p", "1", "--method", "pmle"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(csv), before);
  const nlohmann::json doc = nlohmann::json::parse(r.out);
  std::ifstream in(csv);
  const Vector mean = sample_mean(io::read_csv(in));
  const auto mu = doc["estimate"]["components"][0]["mean"].get<Vector>();
  for (std::size_t k = 0; k < 2; ++k) EXPECT_NEAR(mu[k], mean[k], 1e-8);
  EXPECT_EQ(doc["starts"].size(), 10u);
  EXPECT_TRUE(doc["converged"].get<bool>());
}

TEST_F(Cli, FitZeroStrengthMatchesMle) {
  const fs::path csv = dir_ / "d.csv";
  ASSERT_EQ(run({"gen", "--model", "I.2.1", "--seed", "5", "--out", csv.string()}).code, 0);
  const Result mle = run({"fit", csv.string(), "--p", "2", "--method", "mle"});
  const Result zero = run({"fit", csv.string(), "--p", "2", "--method", "pmle", "--an", "0"});
  ASSERT_EQ(mle.code, 0);
  ASSERT_EQ(zero.code, 0);
  const auto a = nlohmann::json::parse(mle.out), b = nlohmann::json::parse(zero.out);
  EXPECT_EQ(a["estimate"], b["estimate"]);
  EXPECT_EQ(a["log_likelihood"], b["log_likelihood"]);
  EXPECT_EQ(b["a_n"], 0.0);
  EXPECT_EQ(run({"fit", csv.string(), "--p", "2", "--an", "-1"}).code, 1);
}

TEST_F(Cli, FitRecoversWeights) {
  const fs::path csv = dir_ / "d.csv";
  ASSERT_EQ(run({"gen", "--model", "I.2.1", "--seed", "11", "--out", csv.string()}).code, 0);
  const fs::path out = dir_ / "fit.json";
  const Result r = run({"fit", csv.string(), "--p", "2", "--method", "pmle", "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const nlohmann::json doc = nlohmann::json::parse(slurp(out));
  const MixingDistribution est = io::mixture_from_json(doc["estimate"]);
  const MixingDistribution truth = resolve_model(ModelSpec::parse("I.2.1"));
  const MixingDistribution matched = est.permuted(match_components(est, truth).est_index);
  EXPECT_NEAR(matched[0].weight, 0.3, 0.1);
  EXPECT_NEAR(matched[1].weight, 0.7, 0.1);
  EXPECT_NEAR(doc["a_n"].get<double>(), 1.0 / std::sqrt(200.0), 1e-15);
}

TEST_F(Cli, FitRejectsBadInput) {
  const fs::path csv = dir_ / "bad.csv";
  std::ofstream(csv) << "1,2\n3\n";
  EXPECT_EQ(run({"fit", csv.string(), "--p", "2"}).code, 1);
  EXPECT_EQ(run({"fit", (dir_ / "missing.csv").string(), "--p", "2"}).code, 1);
  std::ofstream(dir_ / "ok.csv") << "1,2\n3,4\n5,7\n";
  EXPECT_EQ(run({"fit", (dir_ / "ok.csv").string(), "--p", "2", "--method", "em"}).code, 1);
  EXPECT_EQ(run({"fit", (dir_ / "ok.csv").string()}).code, 1);
}

TEST_F(Cli, FitReportsDegenerateStarts) {
  // A repeated point pulls unpenalized components into a singular covariance.
  const fs::path csv = dir_ / "tiny.csv";
  std::ofstream(csv) << "0,0\n0,0\n0,0\n5,5\n5,6\n6,5\n6,6\n";
  const Result mle = run({"fit", csv.string(), "--p", "2", "--method", "mle"});
  ASSERT_EQ(mle.code, 0) << mle.err;
  const nlohmann::json doc = nlohmann::json::parse(mle.out);
  EXPECT_GT(doc["degeneracy_count"].get<int>(), 0);
  EXPECT_FALSE(doc["starts"][doc["best_start"].get<std::size_t>()]["degenerate"].get<bool>());

  const Result pmle = run({"fit", csv.string(), "--p", "2", "--method", "pmle"});
  ASSERT_EQ(pmle.code, 0);
  EXPECT_EQ(nlohmann::json::parse(pmle.out)["degeneracy_count"], 0);
}

TEST_F(Cli, SimulateWritesReportsDeterministically) {
  const fs::path a = dir_ / "a", b = dir_ / "b";
  const Result r = run({"simulate", "--models", "I.2.4", "--methods", "mle,pmle1,pmle2", "--reps", "3", "--seed", "1",
                        "--threads", "1", "--out", a.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("Model I.2.4"), std::string::npos);
  const nlohmann::json doc = nlohmann::json::parse(slurp(a / "I.2.4.json"));
  EXPECT_EQ(doc["methods"].size(), 3u);
  ASSERT_EQ(run({"simulate", "--models", "I.2.4", "--methods", "mle,pmle1,pmle2", "--reps", "3", "--seed", "1",
                 "--threads", "2", "--out", b.string()})
                .code,
            0);
  EXPECT_EQ(slurp(a / "I.2.4.json"), slurp(b / "I.2.4.json"));
}

TEST_F(Cli, SimulateDefaultsAndRawErrors) {
  const Result r = run({"simulate", "--model", "I.1.1,I.3.1", "--reps", "2", "--raw-errors", "--out", dir_.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const nlohmann::json doc = nlohmann::json::parse(slurp(dir_ / "I.3.1.json"));
  EXPECT_EQ(doc["methods"].size(), 3u);
  EXPECT_EQ(doc["methods"][0]["raw_errors"].size(), 2u);
  EXPECT_TRUE(fs::exists(dir_ / "I.1.1.json"));
}

TEST_F(Cli, SimulateRejectsBadInput) {
  EXPECT_EQ(run({"simulate", "--models", "I.1.1", "--reps", "1"}).code, 1);
  EXPECT_EQ(run({"simulate", "--models", "I.1.9", "--reps", "2"}).code, 1);
  EXPECT_EQ(run({"simulate", "--models", "I.1.1", "--methods", "ml", "--reps", "2"}).code, 1);
  EXPECT_EQ(run({"simulate", "--reps", "2"}).code, 1);
}

}  // namespace
}  // namespace pmle
