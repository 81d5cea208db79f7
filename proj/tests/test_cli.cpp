#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "helpers.hpp"

using namespace pofd;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("pofd_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args) const {
    const std::string cmd = std::string(POFD_CLI_PATH) + " " + args + " >" + (dir_ / "stdout.txt").string() +
                            " 2>" + (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string read(const std::string& name) const {
    std::ifstream is(dir_ / name);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Last value column of a j,t,value curve file.
  Vector curve(const std::string& name) const {
    std::istringstream is(read(name));
    std::string line;
    std::getline(is, line);
    std::vector<double> v;
    while (std::getline(is, line)) v.push_back(std::stod(line.substr(line.rfind(',') + 1)));
    return Eigen::Map<Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
  }

  std::string outcome(const std::string& report) const {
    const auto pos = report.find("outcome=");
    return report.substr(pos + 8, report.find('\n', pos) - pos - 8);
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, SimulateWritesSampleAndSidecar) {
  ASSERT_EQ(run("simulate --dgp depcon --n 40 --p 101 --seed 3 --out " + path("sim")), 0);
  std::ifstream is(path("sim/sample.csv"));
  const auto s = csv::read_sample(is);
  EXPECT_EQ(s.n(), 40u);
  EXPECT_EQ(s.p(), 101u);
  EXPECT_EQ(read("sim/coefficients.csv").rfind("i,d_i,xi_1,xi_2,xi_3,xi_4,xi_5\n", 0), 0u);
  DgpConfig cfg;
  cfg.kind = DgpKind::DepCon;
  cfg.n = 40;
  cfg.p = 101;
  cfg.seed = 3;
  EXPECT_TRUE((draw_sample(cfg).sample.mask() == s.mask()).all());
}

TEST_F(Cli, EstimateSeparatesMeansUnderDependence) {
  ASSERT_EQ(run("simulate --dgp depdis --n 337 --p 501 --seed 1 --out " + path("sim")), 0);
  ASSERT_EQ(run("estimate " + path("sim/sample.csv") + " --out " + path("est")), 0);
  for (const char* f : {"mean_classical.csv", "mean_ftc.csv", "cov_classical.csv", "cov_ftc.csv"})
    EXPECT_TRUE(fs::exists(dir_ / "est" / f)) << f;
  EXPECT_FALSE(fs::exists(dir_ / "est" / "fpc_scores.csv"));
  const Vector classical = curve("est/mean_classical.csv"), ftc = curve("est/mean_ftc.csv");
  ASSERT_EQ(classical.size(), 501);
  EXPECT_GT((classical.tail(50) - ftc.tail(50)).cwiseAbs().minCoeff(), 1.0);
}

TEST_F(Cli, EstimateAgreesUnderFullObservation) {
  {
    std::ofstream os(path("full.csv"));
    csv::write_sample(os, test_util::full_dgp_sample(30, 201, 4));
  }
  ASSERT_EQ(run("estimate " + path("full.csv") + " --fpc --out " + path("est")), 0);
  EXPECT_LT((curve("est/mean_classical.csv") - curve("est/mean_ftc.csv")).cwiseAbs().maxCoeff(), 1e-3);
  const std::string fpc = read("est/fpc_scores.csv");
  EXPECT_NE(fpc.find("# explained="), std::string::npos);
  EXPECT_NE(fpc.find("\ni,score_1,"), std::string::npos);
}

TEST_F(Cli, EmptyAndMalformedInputAreDataErrors) {
  { std::ofstream os(path("empty.csv")); }
  EXPECT_EQ(run("estimate " + path("empty.csv") + " --out " + path("est")), 2);
  {
    std::ofstream os(path("bad.csv"));
    os << "t,0,0.5,1\nc,1,2,3\nc,1,x,3\n";
  }
  EXPECT_EQ(run("estimate " + path("bad.csv") + " --out " + path("est")), 2);
  EXPECT_NE(read("stderr.txt").find("line 3"), std::string::npos);
  EXPECT_EQ(run("test " + path("missing.csv")), 2);
}

TEST_F(Cli, NonIntervalPatternNeedsAnchor) {
  ASSERT_EQ(run("simulate --dgp depdis-mirrored --n 50 --p 101 --out " + path("sim")), 0);
  EXPECT_EQ(run("estimate " + path("sim/sample.csv") + " --out " + path("est")), 2);
  EXPECT_NE(read("stderr.txt").find("d_f"), std::string::npos);
  EXPECT_EQ(run("estimate " + path("sim/sample.csv") + " --d-f 1 --fpc --out " + path("est")), 0);
  EXPECT_TRUE(fs::exists(dir_ / "est" / "fpc_scores.csv"));
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("simulate --bogus"), 1);
  EXPECT_EQ(run("simulate --dgp nope --out " + path("x")), 1);
  EXPECT_EQ(run("experiment --reps 0 --dgp depdis --n 10"), 1);
  EXPECT_EQ(run("--help"), 0);
}

TEST_F(Cli, TestCommandOutcomes) {
  ASSERT_EQ(run("simulate --dgp depdis --n 250 --seed 1 --out " + path("dep")), 0);
  ASSERT_EQ(run("simulate --dgp inddis --n 250 --seed 1 --out " + path("ind")), 0);
  ASSERT_EQ(run("test " + path("dep/sample.csv") + " --out " + path("dep.txt")), 0);
  ASSERT_EQ(run("test " + path("ind/sample.csv") + " --out " + path("ind.txt")), 0);
  EXPECT_EQ(outcome(read("dep.txt")), "V");
  EXPECT_EQ(outcome(read("ind.txt")), "Null");
  ASSERT_EQ(run("test " + path("dep/sample.csv") + " --j-max 41 --out " + path("dep41.txt")), 0);
  ASSERT_EQ(run("test " + path("ind/sample.csv") + " --j-max 41"), 0);
  EXPECT_EQ(outcome(read("dep41.txt")), "V");
  EXPECT_EQ(outcome(read("stdout.txt")), "Null");
}

TEST_F(Cli, ExperimentWithConfigAndOverrides) {
  {
    std::ofstream os(path("exp.cfg"));
    os << "mode=bias_variance\ndgp=depdis\nn=40\nreps=5\np=41\nseed=2\n";
  }
  ASSERT_EQ(run("experiment --config " + path("exp.cfg") + " --no-cov --out " + path("a.csv")), 0);
  ASSERT_EQ(run("experiment --config " + path("exp.cfg") + " --no-cov --out " + path("b.csv")), 0);
  const std::string a = read("a.csv");
  EXPECT_EQ(a, read("b.csv"));
  EXPECT_NE(a.find("# reps=5\n"), std::string::npos);
  EXPECT_NE(a.find("# cov=0\n"), std::string::npos);
  EXPECT_NE(a.find("depdis,40,mean_classical,"), std::string::npos);
  ASSERT_EQ(run("experiment --config " + path("exp.cfg") + " --reps 3 --seed 4"), 0);
  EXPECT_NE(read("stdout.txt").find("# reps=3\n# p=41\n"), std::string::npos);
  {
    std::ofstream os(path("bad.cfg"));
    os << "reps=3\nfoo=1\n";
  }
  EXPECT_EQ(run("experiment --config " + path("bad.cfg")), 2);
}
