#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "srisk/error.hpp"
#include "srisk/models.hpp"
#include "srisk/rng.hpp"

namespace srisk {
namespace {

PortfolioModel two_asset(Box box) {
  Vector mu(2);
  mu << 0.1, 0.05;
  Matrix sigma(2, 2);
  sigma << 0.04, 0.0, 0.0, 0.01;
  return PortfolioModel(mu, sigma, std::move(box));
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::ConfigError;
}

TEST(Sample, DeterministicPerSeed) {
  const auto a = sample(GaussianSource{0.0, 1.0}, 3, 7);
  const auto b = sample(GaussianSource{0.0, 1.0}, 3, 7);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.seed_tag, 7u);
  EXPECT_NE(sample(GaussianSource{0.0, 1.0}, 3, 8).values, a.values);

  const auto model = two_asset({{0, 1}, {0, 1}});
  EXPECT_EQ(sample(model, 5, 3).values, sample(model, 5, 3).values);
}

TEST(Sample, NearDegenerateConcentration) {
  const auto batch = sample(GaussianSource{5.0, 1e-9}, 10000, 1);
  double s = 0.0;
  for (const double v : batch.values) s += v;
  EXPECT_NEAR(s / 10000.0, 5.0, 1e-3);
}

TEST(Sample, StandardNormalVariance) {
  const std::size_t n = 1'000'000;
  const auto batch = sample(GaussianSource{0.0, 1.0}, n, 2024);
  double s = 0.0;
  double sq = 0.0;
  for (const double v : batch.values) {
    s += v;
    sq += v * v;
  }
  const double m = s / static_cast<double>(n);
  const double var = sq / static_cast<double>(n) - m * m;
  EXPECT_GE(var, 0.99);
  EXPECT_LE(var, 1.01);
  EXPECT_NEAR(m, 0.0, 5.0 / std::sqrt(static_cast<double>(n)));
}

TEST(Sample, PortfolioMomentsMatchModel) {
  Vector mu(3);
  mu << 0.2, -0.1, 0.05;
  Matrix sigma(3, 3);
  sigma << 0.09, 0.03, 0.0, 0.03, 0.04, -0.01, 0.0, -0.01, 0.02;
  const PortfolioModel model(mu, sigma, Box(3, {-1, 1}));
  const auto batch = sample(model, 200000, 99);
  const Vector mean = batch.values.colwise().mean().transpose();
  const Matrix centered = batch.values.rowwise() - mean.transpose();
  const Matrix cov = centered.transpose() * centered / static_cast<double>(batch.size());
  EXPECT_LT((mean - mu).cwiseAbs().maxCoeff(), 3e-3);
  EXPECT_LT((cov - sigma).cwiseAbs().maxCoeff(), 2e-3);
}

TEST(Sample, Errors) {
  EXPECT_EQ(code_of([] { sample(GaussianSource{0.0, 1.0}, 0, 1); }), ErrorCode::InvalidParameter);
  EXPECT_EQ(code_of([] { sample(GaussianSource{0.0, -1.0}, 3, 1); }), ErrorCode::InvalidParameter);
}

TEST(PortfolioModelTest, Validation) {
  Vector mu = Vector::Zero(2);
  Matrix not_pd(2, 2);
  not_pd << 1.0, 2.0, 2.0, 1.0;
  EXPECT_EQ(code_of([&] { PortfolioModel(mu, not_pd, Box(2, {0, 1})); }), ErrorCode::FactorizationFailure);
  Matrix singular = Matrix::Zero(2, 2);
  singular(0, 0) = 1.0;
  EXPECT_EQ(code_of([&] { PortfolioModel(mu, singular, Box(2, {0, 1})); }), ErrorCode::FactorizationFailure);
  Matrix asym(2, 2);
  asym << 1.0, 0.1, 0.0, 1.0;
  EXPECT_EQ(code_of([&] { PortfolioModel(mu, asym, Box(2, {0, 1})); }), ErrorCode::InvalidParameter);
  EXPECT_EQ(code_of([&] { PortfolioModel(mu, Matrix::Identity(3, 3), Box(2, {0, 1})); }),
            ErrorCode::DimensionMismatch);
  EXPECT_EQ(code_of([&] { PortfolioModel(mu, Matrix::Identity(2, 2), Box(1, {0, 1})); }),
            ErrorCode::DimensionMismatch);
  EXPECT_EQ(code_of([&] { PortfolioModel(mu, Matrix::Identity(2, 2), Box{{0, 1}, {2, 1}}); }),
            ErrorCode::InvalidParameter);
}

TEST(PortfolioValue, Examples) {
  EXPECT_EQ(portfolio_value(Vector::Unit(2, 0), Vector{{3.0, 9.0}}), 3.0);
  EXPECT_EQ(portfolio_value(Vector::Zero(2), Vector{{3.0, -9.0}}), 0.0);
  EXPECT_DOUBLE_EQ(portfolio_value(Vector{{1.0, 2.0}}, Vector{{0.5, 0.25}}), 1.0);
  EXPECT_EQ(code_of([] { portfolio_value(Vector::Zero(2), Vector::Zero(3)); }), ErrorCode::DimensionMismatch);
}

TEST(PortfolioGrad, ExamplesAndFiniteDifferences) {
  EXPECT_EQ(portfolio_grad(Vector{{4.0, -2.0}}, Vector{{1.0, 1.0}}), Vector::Ones(2));
  EXPECT_EQ(portfolio_grad(Vector{{4.0, -2.0}}, Vector::Zero(2)), Vector::Zero(2));
  EXPECT_EQ(code_of([] { portfolio_grad(Vector::Zero(2), Vector::Zero(1)); }), ErrorCode::DimensionMismatch);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 100; ++trial) {
    Vector theta(3);
    Vector xi(3);
    for (int i = 0; i < 3; ++i) {
      theta[i] = n(rng);
      xi[i] = n(rng);
    }
    const Vector g = portfolio_grad(theta, xi);
    for (int i = 0; i < 3; ++i) {
      const double h = 1e-5;
      Vector up = theta;
      Vector dn = theta;
      up[i] += h;
      dn[i] -= h;
      EXPECT_NEAR(g[i], (portfolio_value(up, xi) - portfolio_value(dn, xi)) / (2 * h), 1e-8);
    }
  }
}

TEST(GaussianOracle, Examples) {
  EXPECT_DOUBLE_EQ(gaussian_ubsr_oracle(0.0, 1.0, 0.5, 1.0), 0.25);
  EXPECT_NEAR(gaussian_ubsr_oracle(0.0, 1e-12, 1.0, 1.0), 0.0, 1e-20);
  EXPECT_NEAR(gaussian_ubsr_oracle(0.0, 1.0, 0.5, 0.05), 6.241464547107982, 1e-12);
  EXPECT_EQ(code_of([] { gaussian_ubsr_oracle(0.0, 1.0, 0.0, 1.0); }), ErrorCode::InvalidParameter);
  EXPECT_EQ(code_of([] { gaussian_ubsr_oracle(0.0, 1.0, 1.0, -1.0); }), ErrorCode::InvalidParameter);
  EXPECT_EQ(code_of([] { gaussian_ubsr_oracle(0.0, 0.0, 1.0, 1.0); }), ErrorCode::InvalidParameter);
}

TEST(PortfolioOracle, Examples) {
  const auto model = two_asset({{-100, 100}, {-100, 100}});
  EXPECT_EQ(portfolio_ubsr_oracle(Vector::Zero(2), model, 1.0, 1.0), 0.0);
  EXPECT_NEAR(portfolio_ubsr_oracle(Vector::Ones(2), model, 0.5, 0.05), 5.8539645471079815, 1e-12);
  EXPECT_EQ(code_of([&] { portfolio_ubsr_oracle(Vector::Zero(3), model, 1.0, 1.0); }),
            ErrorCode::DimensionMismatch);
  EXPECT_EQ(code_of([&] { portfolio_ubsr_oracle(Vector::Zero(2), model, 1.0, 0.0); }),
            ErrorCode::InvalidParameter);
}

// F(theta, xi) ~ N(mu^T theta, theta^T Sigma theta), so the quadratic must equal
// the scalar closed form evaluated at those moments.
TEST(PortfolioOracle, AgreesWithScalarComposition) {
  const auto model = two_asset({{-100, 100}, {-100, 100}});
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::uniform_real_distribution<double> pos(0.05, 2.0);
  for (int i = 0; i < 1000; ++i) {
    const Vector theta{{u(rng), u(rng)}};
    const double beta = pos(rng);
    const double lambda = pos(rng);
    const double composed = gaussian_ubsr_oracle(model.mu().dot(theta), std::sqrt(theta.dot(model.sigma() * theta)),
                                                 beta, lambda);
    const double direct = portfolio_ubsr_oracle(theta, model, beta, lambda);
    ASSERT_NEAR(direct, composed, 1e-12 * (1.0 + std::abs(direct)));
  }
}

TEST(PortfolioOracle, StrongConvexity) {
  const auto model = two_asset({{-100, 100}, {-100, 100}});
  const double beta = 0.5;
  const double mu_sc = beta * model.min_eigenvalue();
  EXPECT_NEAR(mu_sc, 0.005, 1e-15);
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 1000; ++i) {
    const Vector a{{u(rng), u(rng)}};
    const Vector b{{u(rng), u(rng)}};
    const double lhs = portfolio_ubsr_oracle(b, model, beta, 0.05);
    const double rhs = portfolio_ubsr_oracle(a, model, beta, 0.05) +
                       portfolio_ubsr_gradient_oracle(a, model, beta).dot(b - a) + 0.5 * mu_sc * (b - a).squaredNorm();
    ASSERT_GE(lhs, rhs - 1e-9);
  }
}

TEST(ArgminOracle, Examples) {
  const Vector wide = portfolio_argmin_oracle(two_asset({{-100, 100}, {-100, 100}}), 0.5);
  EXPECT_NEAR(wide[0], 5.0, 1e-12);
  EXPECT_NEAR(wide[1], 10.0, 1e-12);

  const auto unit_model = two_asset({{0, 1}, {0, 1}});
  const Vector unit = portfolio_argmin_oracle(unit_model, 0.5);
  EXPECT_EQ(unit, Vector::Ones(2));
  // KKT at the upper corner: the gradient points out of the box.
  const Vector g = portfolio_ubsr_gradient_oracle(unit, unit_model, 0.5);
  EXPECT_LT(g[0], 0.0);
  EXPECT_LT(g[1], 0.0);

  const PortfolioModel zero_mu(Vector::Zero(2), unit_model.sigma(), Box{{-1, 2}, {0.5, 3}});
  const Vector z = portfolio_argmin_oracle(zero_mu, 0.5);
  EXPECT_NEAR(z[0], 0.0, 1e-12);
  EXPECT_NEAR(z[1], 0.5, 1e-12);
}

TEST(ArgminOracle, MatchesNormalEquationsWithCorrelation) {
  Vector mu(3);
  mu << 0.08, 0.12, 0.03;
  Matrix sigma(3, 3);
  sigma << 0.09, 0.02, 0.01, 0.02, 0.16, 0.03, 0.01, 0.03, 0.04;
  const PortfolioModel model(mu, sigma, Box(3, {-50, 50}));
  const Vector expected = (0.7 * sigma).llt().solve(mu);
  EXPECT_LT((portfolio_argmin_oracle(model, 0.7) - expected).norm(), 1e-10);
}

TEST(GaussianReference, ExponentialIsClosedForm) {
  EXPECT_DOUBLE_EQ(gaussian_ubsr_reference({0.0, 1.0}, LossFunction::exponential(0.5), 0.05),
                   gaussian_ubsr_oracle(0.0, 1.0, 0.5, 0.05));
}

// Frozen from adaptive quadrature of E[l(-X - t)] plus Brent root finding.
TEST(GaussianReference, MatchesQuadratureRoots) {
  EXPECT_NEAR(gaussian_ubsr_reference({0.0, 1.0}, LossFunction::piecewise(2.0, 0.5), 1.0), -0.29990057518311863,
              1e-9);
  EXPECT_NEAR(gaussian_ubsr_reference({0.3, 2.0}, LossFunction::piecewise(2.0, 0.5), 0.2), 0.5909174316582092,
              1e-9);
  EXPECT_NEAR(gaussian_ubsr_reference({0.0, 1.0}, LossFunction::polynomial(2.0), 0.5), -0.47065535261832453, 1e-9);
  EXPECT_NEAR(gaussian_ubsr_reference({-1.0, 0.5}, LossFunction::polynomial(2.0), 0.05), 1.068300082767719, 1e-9);
  EXPECT_EQ(code_of([] { gaussian_ubsr_reference({0.0, 1.0}, LossFunction::polynomial(3.0), 0.5); }),
            ErrorCode::InvalidParameter);
}

TEST(Rng, DerivedSeedsAreDistinct) {
  EXPECT_NE(derive_seed(1, {0}), derive_seed(1, {1}));
  EXPECT_NE(derive_seed(1, {0}), derive_seed(2, {0}));
  EXPECT_NE(derive_seed(1, {0, 1}), derive_seed(1, {1, 0}));
  EXPECT_EQ(derive_seed(9, {3, 4}), derive_seed(9, {3, 4}));
}

}  // namespace
}  // namespace srisk
