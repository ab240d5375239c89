#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "srisk/loss.hpp"

namespace srisk {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Scalar Gaussian N(mu, sigma^2).
struct GaussianSource {
  double mu = 0.0;
  double sigma = 1.0;
};

struct Interval {
  double lo;
  double hi;
};

/// Axis-aligned box; one interval per coordinate.
using Box = std::vector<Interval>;

/// Gaussian asset-return model xi ~ N(mu, sigma) with an allocation box.
class PortfolioModel {
 public:
  /// Validates dimensions, symmetry (to 1e-12), positive definiteness and the
  /// box. Throws DimensionMismatch, InvalidParameter or FactorizationFailure.
  PortfolioModel(Vector mu, Matrix sigma, Box box);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(mu_.size()); }
  const Vector& mu() const noexcept { return mu_; }
  const Matrix& sigma() const noexcept { return sigma_; }
  const Box& box() const noexcept { return box_; }
  /// Lower-triangular factor with sigma = L L^T.
  const Matrix& cholesky() const noexcept { return chol_; }
  double min_eigenvalue() const noexcept { return eig_min_; }
  double max_eigenvalue() const noexcept { return eig_max_; }

 private:
  Vector mu_;
  Matrix sigma_;
  Box box_;
  Matrix chol_;
  double eig_min_ = 0.0;
  double eig_max_ = 0.0;
};

/// Scalar samples of a random variable.
struct SampleBatch {
  std::vector<double> values;
  std::uint64_t seed_tag = 0;

  std::size_t size() const noexcept { return values.size(); }
  operator std::span<const double>() const noexcept { return values; }
};

/// Scenario samples of xi, one draw per row.
struct ScenarioBatch {
  Matrix values;
  std::uint64_t seed_tag = 0;

  std::size_t size() const noexcept { return static_cast<std::size_t>(values.rows()); }
};

/// n i.i.d. draws; identical (n, seed) gives a bit-identical batch.
/// Throws InvalidParameter for n == 0 or sigma <= 0.
SampleBatch sample(const GaussianSource& source, std::size_t n, std::uint64_t seed);
/// n i.i.d. draws mu + L z with L the Cholesky factor of sigma.
ScenarioBatch sample(const PortfolioModel& model, std::size_t n, std::uint64_t seed);

/// F(theta, xi) = xi^T theta.
double portfolio_value(const Vector& theta, const Vector& xi);
/// Gradient of F in theta, which is xi.
Vector portfolio_grad(const Vector& theta, const Vector& xi);

/// UBSR of N(mu, sigma^2) under l(x) = exp(beta x):
/// -mu + beta sigma^2 / 2 - ln(lambda) / beta.
double gaussian_ubsr_oracle(double mu, double sigma, double beta, double lambda);

/// h(theta) = -mu^T theta + beta theta^T Sigma theta / 2 - ln(lambda) / beta.
double portfolio_ubsr_oracle(const Vector& theta, const PortfolioModel& model, double beta, double lambda);

/// grad h(theta) = -mu + beta Sigma theta.
Vector portfolio_ubsr_gradient_oracle(const Vector& theta, const PortfolioModel& model, double beta);

/// Minimizer of h over the model box. Projected gradient on the exact
/// quadratic until the gradient-map norm is <= 1e-10, then an active-set
/// polish that solves the free coordinates exactly. Throws NonConvergence
/// after 10^6 iterations.
Vector portfolio_argmin_oracle(const PortfolioModel& model, double beta);

/// UBSR of N(mu, sigma^2) for any loss with a Gaussian closed form for
/// E[l(-X - t)]: exponential (exact formula), piecewise linear and
/// polynomial with p = 2 (root of the closed-form expectation, solved to
/// machine precision). Throws InvalidParameter for other losses.
double gaussian_ubsr_reference(const GaussianSource& source, const LossFunction& loss, double lambda);

}  // namespace srisk
