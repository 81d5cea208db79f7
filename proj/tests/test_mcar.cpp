#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "helpers.hpp"

using namespace pofd;

namespace {

// n x J regressors with independent N(0, 1) entries plus a level.
Matrix gaussian_design(std::size_t n, std::size_t J, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(J));
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = 3.0 + 2.0 * z(rng);
  return x;
}

Vector noise(std::size_t n, double sd, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, sd);
  Vector v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = z(rng);
  return v;
}

DgpConfig config(DgpKind kind, std::size_t n, std::uint64_t seed) {
  DgpConfig c;
  c.kind = kind;
  c.n = n;
  c.p = 201;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(Regression, ConstantResponse) {
  const Matrix xi = gaussian_design(40, 5, 1);
  const auto fit = fit_regression(Vector::Constant(40, 0.75), xi);
  EXPECT_LT(fit.beta_hat.tail(5).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT(fit.t_sq.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Regression, NoiselessLinearResponse) {
  const Matrix xi = gaussian_design(40, 5, 2);
  const Vector d = 2.0 * xi.col(0);
  const auto fit = fit_regression(d, xi);
  EXPECT_NEAR(fit.beta_hat(1), 2.0, 1e-10);
  EXPECT_LT(fit.se(1), 1e-10);
  EXPECT_GT(fit.t_sq(0), 1e12);
  EXPECT_LT(fit.t_sq.tail(4).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Regression, ClassicalStandardErrors) {
  const Matrix xi = gaussian_design(30, 3, 3);
  const Vector d = 1.0 + 0.5 * xi.col(1).array() + noise(30, 0.3, 4).array();
  const auto fit = fit_regression(d, xi);
  Matrix x(30, 4);
  x << Vector::Ones(30), xi;
  const Matrix xtx_inv = (x.transpose() * x).inverse();
  const double sigma2 = fit.residuals.squaredNorm() / (30 - 4);
  for (Eigen::Index j = 0; j < 4; ++j) EXPECT_NEAR(fit.se(j), std::sqrt(sigma2 * xtx_inv(j, j)), 1e-10);
  for (Eigen::Index j = 0; j < 3; ++j) EXPECT_NEAR(fit.t_sq(j), std::pow(fit.beta_hat(j + 1) / fit.se(j + 1), 2), 1e-9);
  EXPECT_NEAR(fit.residuals.sum(), 0.0, 1e-8);
  EXPECT_LT((fit.fitted + fit.residuals - d).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Regression, CoverageOfSlope) {
  std::size_t covered = 0;
  for (std::uint64_t r = 0; r < 500; ++r) {
    const Matrix xi = gaussian_design(500, 5, 1000 + r);
    const Vector d = 0.5 + 0.3 * xi.col(0).array() + noise(500, 0.1, 5000 + r).array();
    const auto fit = fit_regression(d, xi);
    covered += std::abs(fit.beta_hat(1) - 0.3) <= 3.0 * fit.se(1);
  }
  EXPECT_GE(covered, 495u);
}

TEST(Regression, RankDeficientDesign) {
  Matrix xi = gaussian_design(20, 3, 6);
  xi.col(2) = 2.0 * xi.col(0) - xi.col(1);
  EXPECT_THROW(fit_regression(noise(20, 1.0, 7), xi), NumericalError);
  EXPECT_THROW(fit_regression(noise(4, 1.0, 7), gaussian_design(4, 3, 8)), ArgumentError);
}

TEST(Bootstrap, NoiselessResponseGivesZeroStatistics) {
  const Matrix xi = gaussian_design(50, 5, 9);
  const auto boot = bootstrap_statistics(2.0 * xi.col(0), xi, 200, 1);
  EXPECT_EQ(boot.statistics.rows(), 200);
  EXPECT_EQ(boot.statistics.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Bootstrap, DeterministicGivenSeed) {
  const Matrix xi = gaussian_design(60, 5, 10);
  const Vector d = noise(60, 1.0, 11);
  const auto a = bootstrap_statistics(d, xi, 300, 42);
  const auto b = bootstrap_statistics(d, xi, 300, 42);
  const auto c = bootstrap_statistics(d, xi, 300, 43);
  EXPECT_EQ(a.statistics, b.statistics);
  EXPECT_NE(a.statistics, c.statistics);
  EXPECT_THROW(bootstrap_statistics(d, xi, 99, 42), ArgumentError);
}

TEST(Bootstrap, NullQuantileNearChiSquare) {
  const Matrix xi = gaussian_design(500, 5, 12);
  const Vector d = noise(500, 1.0, 13);
  const auto boot = bootstrap_statistics(d, xi, 1000, 7);
  std::vector<double> col(boot.statistics.col(0).data(), boot.statistics.col(0).data() + 1000);
  std::sort(col.begin(), col.end());
  const double q95 = col[949];
  EXPECT_GE(q95, 3.0);
  EXPECT_LE(q95, 4.9);
}

TEST(Stepdown, AllZeroStatisticsIsNull) {
  const Matrix xi = gaussian_design(40, 5, 14);
  const auto rep = romano_wolf(Vector::Constant(40, 1.0), xi, 0.05, 200, 1);
  EXPECT_EQ(rep.outcome, Outcome::Null);
  EXPECT_TRUE(rep.rejected.empty());
  ASSERT_EQ(rep.p_values.size(), 1u);
  EXPECT_EQ(rep.p_values[0], 1.0);
}

TEST(Stepdown, PValueFormulaOnHandMadeStatistics) {
  // Observed (9, 1); replication maxima over both are 10, 8, 0.5, ...
  Vector t(2);
  t << 9.0, 1.0;
  Matrix boot(5, 2);
  boot << 10, 0, 0.5, 8, 0.2, 0.3, 0.1, 0.1, 100, 100;
  const auto rep = detail::stepdown(t, boot, 0.5);
  // step 1: rows 0..3 compared, max >= 9 only in row 0 -> (1 + 1) / 5
  // step 2: column 1 alone, >= 1 in row 1 only -> (1 + 1) / 5
  ASSERT_EQ(rep.p_values.size(), 2u);
  EXPECT_DOUBLE_EQ(rep.p_values[0], 0.4);
  EXPECT_DOUBLE_EQ(rep.p_values[1], 0.4);
  EXPECT_EQ(rep.rejected, (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(rep.outcome, Outcome::Other);
}

TEST(Stepdown, ClassificationRules) {
  EXPECT_EQ(classify({}), Outcome::Null);
  EXPECT_EQ(classify({1}), Outcome::V);
  EXPECT_EQ(classify({2}), Outcome::Other);
  EXPECT_EQ(classify({1, 3}), Outcome::Other);
}

TEST(Stepdown, ViolationConstructionSelectsV) {
  std::size_t v = 0;
  const std::size_t reps = 200;
  for (std::uint64_t r = 0; r < reps; ++r) {
    const Matrix xi = gaussian_design(150, 5, 2000 + r);
    const Vector d = 0.5 + 0.3 * xi.col(0).array() + noise(150, 0.1, 3000 + r).array();
    const auto rep = romano_wolf(d, xi, 0.05, 1000, r);
    v += rep.outcome == Outcome::V;
    for (std::size_t k = 0; k < rep.rejected.size(); ++k) EXPECT_LE(rep.p_values[k], 0.05);
    if (rep.rejected.size() < 5) EXPECT_GT(rep.p_values.back(), 0.05);
  }
  EXPECT_GE(double(v) / reps, 0.95);
}

TEST(Stepdown, DeterministicAndScaleInvariant) {
  const Matrix xi = gaussian_design(120, 5, 15);
  const Vector d = 0.2 * xi.col(0).array() + 0.1 * xi.col(3).array() + noise(120, 1.0, 16).array();
  const auto a = romano_wolf(d, xi, 0.05, 500, 3);
  const auto b = romano_wolf(d, xi, 0.05, 500, 3);
  EXPECT_EQ(serialize(a), serialize(b));

  Matrix scaled = xi;
  scaled.col(0) *= -4.0;
  scaled.col(3) *= 0.01;
  const auto fa = fit_regression(d, xi), fs = fit_regression(d, scaled);
  EXPECT_LT((fa.t_sq - fs.t_sq).cwiseAbs().maxCoeff(), 1e-8 * fa.t_sq.maxCoeff());
  const auto ba = bootstrap_statistics(d, xi, 200, 5), bs = bootstrap_statistics(d, scaled, 200, 5);
  EXPECT_LT((ba.statistics - bs.statistics).cwiseAbs().maxCoeff(), 1e-8 * ba.statistics.maxCoeff());
  const auto c = romano_wolf(d, scaled, 0.05, 500, 3);
  EXPECT_EQ(c.rejected, a.rejected);
  EXPECT_EQ(c.outcome, a.outcome);
}

TEST(Stepdown, PermutationRelabelsRejections) {
  const Matrix xi = gaussian_design(150, 4, 17);
  const Vector d = 0.3 * xi.col(2).array() + noise(150, 0.5, 18).array();
  const std::vector<Eigen::Index> perm{3, 0, 2, 1};  // new column k is old perm[k]
  Matrix permuted(150, 4);
  for (Eigen::Index k = 0; k < 4; ++k) permuted.col(k) = xi.col(perm[std::size_t(k)]);
  const auto a = romano_wolf(d, xi, 0.05, 500, 9);
  const auto b = romano_wolf(d, permuted, 0.05, 500, 9);
  std::vector<std::size_t> relabeled;
  for (std::size_t k : b.rejected) relabeled.push_back(std::size_t(perm[k - 1]) + 1);
  EXPECT_EQ(relabeled, a.rejected);
  EXPECT_EQ(a.rejected, (std::vector<std::size_t>{3}));
}

TEST(Stepdown, ArgumentChecks) {
  const Matrix xi = gaussian_design(40, 3, 19);
  const Vector d = noise(40, 1.0, 20);
  EXPECT_THROW(romano_wolf(d, xi, 0.0, 200, 1), ArgumentError);
  EXPECT_THROW(romano_wolf(d, xi, 1.0, 200, 1), ArgumentError);
  EXPECT_THROW(romano_wolf(d.head(30), xi, 0.05, 200, 1), ArgumentError);
}

TEST(Report, SerializedFields) {
  const Matrix xi = gaussian_design(40, 3, 21);
  const auto rep = romano_wolf(noise(40, 1.0, 22), xi, 0.05, 200, 77);
  const std::string text = serialize(rep);
  for (const char* key : {"outcome=", "alpha=0.05\n", "R=200\n", "seed=77\n", "J=3\n", "n=40\n", "rejected=", "p_values="})
    EXPECT_NE(text.find(key), std::string::npos) << key;
}

TEST(ClassifyAndTest, FullyObservedIsDegenerateNull) {
  const auto s = test_util::full_dgp_sample(50, 201, 23);
  const auto rep = classify_and_test(s, 51, 0.05, 200, 1);
  EXPECT_EQ(rep.outcome, Outcome::Null);
  EXPECT_TRUE(rep.degenerate_response);
}

TEST(ClassifyAndTest, RequiresIntervalPattern) {
  const auto s = draw_sample(config(DgpKind::DepDisMirrored, 50, 24)).sample;
  EXPECT_THROW(classify_and_test(s, 51, 0.05, 200, 1), PreconditionError);
}

TEST(ClassifyAndTest, DepDisAtN250) {
  std::size_t v = 0;
  const std::size_t reps = 500;
  for (std::uint64_t r = 0; r < reps; ++r) {
    const auto s = draw_sample(config(DgpKind::DepDis, 250, 10000 + r)).sample;
    v += classify_and_test(s, 51, 0.05, 1000, r).outcome == Outcome::V;
  }
  EXPECT_GE(double(v) / reps, 0.93);
}

TEST(ClassifyAndTest, FamilyWiseErrorUnderIndDis) {
  std::size_t any = 0;
  const std::size_t reps = 500;
  for (std::uint64_t r = 0; r < reps; ++r) {
    const auto s = draw_sample(config(DgpKind::IndDis, 500, 20000 + r)).sample;
    any += !classify_and_test(s, 51, 0.05, 1000, r).rejected.empty();
  }
  EXPECT_LE(double(any) / reps, 0.07);
}
