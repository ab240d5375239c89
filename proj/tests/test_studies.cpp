#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "srisk/config.hpp"
#include "srisk/error.hpp"
#include "srisk/rng.hpp"
#include "srisk/studies.hpp"

namespace srisk {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("srisk_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

EstimateStudyConfig normal_study(std::vector<std::size_t> m, std::size_t reps) {
  EstimateStudyConfig cfg;
  cfg.source = {0.0, 1.0};
  cfg.loss = LossFunction::exponential(0.5);
  cfg.lambda = 0.05;
  cfg.m_list = std::move(m);
  cfg.reps = reps;
  return cfg;
}

PortfolioModel two_asset(double var_scale = 1.0) {
  Vector mu(2);
  mu << 0.1, 0.05;
  Matrix sigma(2, 2);
  sigma << 0.04 * var_scale, 0.0, 0.0, 0.01 * var_scale;
  return PortfolioModel(mu, sigma, Box(2, {-100, 100}));
}

TEST(EstimateStudy, ConfigFromText) {
  const auto cfg = EstimateStudyConfig::from(Config::parse(
      "source = gaussian(mu=0, sigma=1)\nloss = exponential(beta=0.5)\nlambda = 0.05\nm = 10,100\nreps = 7\n"
      "schedule = inverse_quarter_power\nd1 = 0.3\n"));
  EXPECT_EQ(cfg.reps, 7u);
  EXPECT_EQ(cfg.m_list, (std::vector<std::size_t>{10, 100}));
  EXPECT_EQ(cfg.estimator.d1, 0.3);
  EXPECT_EQ(cfg.estimator.schedule, DeltaSchedule::InverseQuarterPower);
  EXPECT_THROW(EstimateStudyConfig::from(Config::parse("loss = exponential(beta=1)\nlambda = 1\nm = 1\ntypo = 2\n")),
               ConfigError);
  EXPECT_THROW(EstimateStudyConfig::from(Config::parse("loss = exponential(beta=1)\nlambda = -1\nm = 1\n")),
               ConfigError);
}

TEST(EstimateStudy, SingleSampleClosedForm) {
  const auto cfg = normal_study({1}, 1);
  const auto reps = replicate_estimates(cfg, 1, 42);
  ASSERT_EQ(reps.size(), 1u);
  const double z = sample(cfg.source, 1, derive_seed(42, {1, 0})).values[0];
  const double expected = (-z - std::log(0.05) / 0.5) - 6.241464547107982;
  EXPECT_NEAR(*reps[0].err, expected, reps[0].estimate.delta + 1e-12);
}

TEST(EstimateStudy, NearDeterministicSourceHasNoSamplingError) {
  auto cfg = normal_study({1, 10, 100}, 50);
  cfg.source.sigma = 1e-12;
  cfg.fixed_delta = 1e-9;
  const auto stats = run_estimate_study(cfg, 3);
  for (const auto& row : stats) {
    EXPECT_LE(std::max(std::abs(row.q05), std::abs(row.q95)), 2e-9) << row.m;
  }
}

TEST(EstimateStudy, ErrorsShrinkWithM) {
  const auto stats = run_estimate_study(normal_study({10, 100, 1000}, 400), 5);
  ASSERT_EQ(stats.size(), 3u);
  for (std::size_t i = 0; i < stats.size(); ++i) {
    const auto& s = stats[i];
    EXPECT_LE(s.q05, s.q25);
    EXPECT_LE(s.q25, s.q50);
    EXPECT_LE(s.q50, s.q75);
    EXPECT_LE(s.q75, s.q95);
    EXPECT_GE(s.mse, s.mean_err * s.mean_err);
    EXPECT_DOUBLE_EQ(s.mse_times_m, s.mse * static_cast<double>(s.m));
    if (i > 0) {
      EXPECT_LT(s.q75 - s.q25, stats[i - 1].q75 - stats[i - 1].q25);
      EXPECT_LT(s.mse, stats[i - 1].mse);
    }
  }
  EXPECT_LT(std::abs(stats[2].mean_err), std::abs(stats[0].mean_err));
}

TEST(EstimateStudy, CsvIsByteIdenticalAcrossRunsAndThreadCounts) {
  const auto a = scratch("est_a");
  const auto b = scratch("est_b");
  const auto cfg = normal_study({10, 100}, 64);
  run_estimate_study(cfg, 9, a);
  setenv("SRISK_THREADS", "1", 1);
  run_estimate_study(cfg, 9, b);
  unsetenv("SRISK_THREADS");
  for (const char* name : {"errors_m10.csv", "errors_m100.csv", "summary.csv"}) {
    ASSERT_TRUE(fs::exists(a / name)) << name;
    EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
  }
  std::istringstream rows(slurp(a / "errors_m10.csv"));
  std::string header;
  std::getline(rows, header);
  EXPECT_EQ(header, "m,rep,t_hat,delta,err,iters_search,iters_bisect");
  std::istringstream summary(slurp(a / "summary.csv"));
  std::getline(summary, header);
  EXPECT_EQ(header, "m,reps,mean_err,mse,mse_times_m,q05,q25,q50,q75,q95");
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(EstimateStudy, LossWithoutReferenceLeavesErrorsEmpty) {
  auto cfg = normal_study({10}, 4);
  cfg.loss = LossFunction::polynomial(3.0);
  const auto dir = scratch("est_noref");
  EXPECT_TRUE(run_estimate_study(cfg, 1, dir).empty());
  std::istringstream rows(slurp(dir / "errors_m10.csv"));
  std::string line;
  std::getline(rows, line);
  std::getline(rows, line);
  EXPECT_NE(line.find(",,"), std::string::npos) << line;
  fs::remove_all(dir);
}

TEST(RateCheck, NeedsThreeGridPoints) {
  try {
    run_rate_check(normal_study({10, 100}, 10), 1);
    ADD_FAILURE() << "no error raised";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientData);
  }
}

TEST(RateCheck, LipschitzLossHasUnitSlope) {
  auto cfg = normal_study({100, 1000, 10000}, 400);
  cfg.loss = LossFunction::piecewise(2.0, 0.5);
  cfg.lambda = 1.0;
  const auto dir = scratch("rate");
  const auto report = run_rate_check(cfg, 11, dir);
  EXPECT_EQ(report.regime, Regime::Lipschitz);
  EXPECT_GE(report.fit.slope, -1.25);
  EXPECT_LE(report.fit.slope, -0.75);
  EXPECT_DOUBLE_EQ(report.implied_constant, std::exp(report.fit.intercept));
  // C2 = 108 L1^2 T^2 / b^2 with L1 = 2, b = 0.5, T = 1.
  EXPECT_DOUBLE_EQ(report.theoretical_constant, 108.0 * 4.0 / 0.25);
  EXPECT_LT(report.implied_constant, report.theoretical_constant);
  EXPECT_TRUE(fs::exists(dir / "rate.csv"));
  EXPECT_TRUE(fs::exists(dir / "rate_summary.csv"));

  // Doubling the scale of every sample raises the implied constant.
  cfg.source.sigma = 2.0;
  EXPECT_GT(run_rate_check(cfg, 11).implied_constant, report.implied_constant);
  fs::remove_all(dir);
}

TEST(RateCheck, SmoothLossDecaysAtLeastAtTheBoundRate) {
  auto cfg = normal_study({100, 1000, 10000}, 300);
  cfg.loss = LossFunction::polynomial(2.0);
  cfg.lambda = 0.5;
  cfg.estimator.schedule = DeltaSchedule::InverseQuarterPower;
  const auto report = run_rate_check(cfg, 12);
  EXPECT_EQ(report.regime, Regime::Smooth);
  EXPECT_LE(report.fit.slope, -0.4);
  EXPECT_GE(report.fit.slope, -1.25);
}

TEST(GradCheck, ConfigParsesThetaList) {
  const auto cfg = GradCheckConfig::from(Config::parse(
      "d = 2\nmu = 0.1, 0.05\nsigma = diag(0.04, 0.01)\nbox = -100:100\nloss = exponential(beta=0.5)\n"
      "lambda = 0.05\nm = 100, 1000\ntheta = 1, 1 ; optimum\n"));
  ASSERT_EQ(cfg.thetas.size(), 2u);
  EXPECT_EQ(cfg.thetas[0], Vector::Ones(2));
  EXPECT_NEAR(cfg.thetas[1][0], 5.0, 1e-10);
  EXPECT_NEAR(cfg.thetas[1][1], 10.0, 1e-10);
  try {
    GradCheckConfig::from(Config::parse(
        "d = 2\nmu = 0.1, 0.05\nsigma = diag(0.04, 0.01)\nbox = -100:100\nloss = exponential(beta=0.5)\n"
        "lambda = 0.05\nm = 100\ntheta = 1, x\n"));
    ADD_FAILURE() << "no error raised";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 8u);
  }
}

TEST(GradCheck, SingleAtomModelHasNoError) {
  GradCheckConfig cfg{two_asset(1e-16)};
  cfg.thetas = {Vector::Ones(2), Vector{{-3.0, 2.0}}};
  cfg.m_list = {10, 100, 1000};
  cfg.reps = 5;
  const auto report = run_grad_check(cfg, 1);
  // Residual jitter of the atom has standard deviation ~2e-9.
  for (const auto& row : report.rows) EXPECT_LT(row.mse, 1e-15);
}

TEST(GradCheck, OptimumNormAndFixedThetaRate) {
  GradCheckConfig cfg{two_asset()};
  cfg.thetas = {Vector::Ones(2), Vector{{5.0, 10.0}}};
  cfg.m_list = {100, 1000, 10000};
  cfg.reps = 300;
  const auto dir = scratch("grad");
  const auto report = run_grad_check(cfg, 2, dir);
  ASSERT_EQ(report.rows.size(), 6u);
  ASSERT_EQ(report.fits.size(), 2u);
  EXPECT_GE(report.fits[0].slope, -1.25);
  EXPECT_LE(report.fits[0].slope, -0.75);
  std::vector<double> norms;
  for (const auto& row : report.rows) {
    if (row.theta_id == 1) norms.push_back(row.mean_sq_norm);
  }
  EXPECT_LE(norms[2], 10.0 * norms[0] / 100.0);
  EXPECT_TRUE(fs::exists(dir / "grad_m100.csv"));
  EXPECT_TRUE(fs::exists(dir / "grad_summary.csv"));
  EXPECT_TRUE(fs::exists(dir / "grad_fit.csv"));
  std::istringstream rows(slurp(dir / "grad_m100.csv"));
  std::string header;
  std::getline(rows, header);
  EXPECT_EQ(header, "m,rep,theta_id,j_1,j_2,t_hat,denom,err_l2");
  fs::remove_all(dir);
}

TEST(OptimizeStudy, EnvelopeAndFiles) {
  OptimizeStudyConfig cfg{two_asset()};
  cfg.n_iters = 300;
  cfg.seeds = 4;
  const auto dir = scratch("opt");
  const auto report = run_optimize_study(cfg, 5, dir);
  ASSERT_TRUE(report.theta_star);
  EXPECT_NEAR(report.c, 400.0, 1e-9);
  ASSERT_EQ(report.envelope.size(), 300u);
  EXPECT_LT(report.envelope[299].median_dist_sq, report.envelope[9].median_dist_sq);
  EXPECT_LT(report.envelope[299].median_h_gap, report.envelope[9].median_h_gap);
  ASSERT_TRUE(report.trend_violations);
  for (std::size_t s = 0; s < 4; ++s) EXPECT_TRUE(fs::exists(dir / ("trace_seed" + std::to_string(s) + ".csv")));
  std::istringstream summary(slurp(dir / "summary.csv"));
  std::string line;
  std::getline(summary, line);
  EXPECT_EQ(line.rfind("# theta_star = ", 0), 0u) << line;
  std::getline(summary, line);
  EXPECT_EQ(line, "# c = 400");
  fs::remove_all(dir);
}

TEST(OptimizeStudy, ConfigDefaultsAndValidation) {
  const std::string base =
      "d = 2\nmu = 0.1, 0.05\nsigma = diag(0.04, 0.01)\nbox = 0:1\nlambda = 0.05\n";
  const auto cfg = OptimizeStudyConfig::from(Config::parse(base + "loss = exponential(beta=0.5)\nc = auto\n"));
  EXPECT_FALSE(cfg.c);
  EXPECT_EQ(cfg.seeds, 20u);
  EXPECT_EQ(cfg.batch.kind, BatchSchedule::Kind::Linear);
  EXPECT_THROW(OptimizeStudyConfig::from(Config::parse(base + "loss = piecewise(pos=2, neg=0.5)\n")), ConfigError);
  EXPECT_THROW(OptimizeStudyConfig::from(Config::parse(base + "loss = exponential(beta=0.5)\ntheta0 = 1\n")),
               ConfigError);
}

}  // namespace
}  // namespace srisk
