#pragma once

#include <cstddef>
#include <cstdint>

#include "srisk/estimator.hpp"
#include "srisk/loss.hpp"
#include "srisk/models.hpp"

namespace srisk {

/// Ratio estimate of grad h(theta) for the portfolio objective.
struct GradientEstimate {
  Vector j;
  double t_hat = 0.0;
  std::size_t m = 0;
  /// Batch mean of l'(-F(theta, z_j) - t_hat).
  double denom = 0.0;
};

/// j = -sum_j l'(-F(theta, z_j) - t_hat) grad F(theta, z_j) / sum_j l'(-F(theta, z_j) - t_hat).
///
/// The leading minus makes j an estimate of grad h. `t_hat` must come from a
/// batch independent of `z`. Throws DimensionMismatch, InvalidParameter for an
/// empty batch, and DegenerateDenominator when the l' sum is not positive.
GradientEstimate estimate_gradient(const Vector& theta, const ScenarioBatch& z, double t_hat,
                                   const PortfolioModel& model, const LossFunction& loss);

struct UbsrGradientSample {
  EstimateResult estimate;
  GradientEstimate gradient;
};

/// Draws two independent m-batches from one seed: the first feeds ubsr_sb on
/// F(theta, .) with delta = delta_schedule(m, config), the second the ratio.
UbsrGradientSample ubsr_and_gradient(const Vector& theta, std::size_t m, const EstimatorConfig& config,
                                     const PortfolioModel& model, const LossFunction& loss, double lambda,
                                     std::uint64_t seed);

/// Constants entering the gradient-estimator error bounds.
struct BoundInputs {
  double C1 = 0.0;
  double C2 = 0.0;
  double d1 = 0.0;
  double L1 = 0.0;
  double L2 = 0.0;
  double M = 0.0;
  double d = 0.0;
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  double b = 0.0;
  // Lipschitz moduli of F and grad F in theta; carried for reporting only.
  double L4 = 0.0;
  double L5 = 0.0;
};

struct GradientBounds {
  double D1_hat;
  double D2_hat;
};

/// D1_hat = (2 (C1 + d1) L1 L2 M + L1 (sigma1 sqrt(d) + M sigma2)) / b^2
/// D2_hat = (8 (C2 + d1^2) L1^2 L2^2 M^2 + 4 L1^2 (d sigma1^2 + M^2 sigma2^2)) / b^4
///
/// C1, C2, L1, L2, M, d and b must be positive; d1, sigma1 and sigma2 may be
/// zero. Throws InvalidParameter otherwise.
GradientBounds theoretical_gradient_bounds(const BoundInputs& in);

}  // namespace srisk
