#include "srisk/gradient.hpp"

#include <cmath>
#include <vector>

#include <fmt/format.h>

#include "srisk/error.hpp"
#include "srisk/rng.hpp"

namespace srisk {

GradientEstimate estimate_gradient(const Vector& theta, const ScenarioBatch& z, double t_hat,
                                   const PortfolioModel& model, const LossFunction& loss) {
  const auto d = static_cast<Eigen::Index>(model.dim());
  if (theta.size() != d || z.values.cols() != d) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("theta has {} entries, scenarios {} columns, model d = {}", theta.size(),
                            z.values.cols(), d));
  }
  if (z.size() == 0) throw Error(ErrorCode::InvalidParameter, "gradient estimate needs a nonempty batch");

  const Vector values = z.values * theta;
  Vector weighted = Vector::Zero(d);
  double denom = 0.0;
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    const double w = loss.derivative(-values[j] - t_hat);
    weighted += w * z.values.row(j).transpose();
    denom += w;
  }
  if (!(denom > 0.0)) {
    throw Error(ErrorCode::DegenerateDenominator,
                fmt::format("sum of l' over the batch is {} at t_hat = {}", denom, t_hat));
  }
  GradientEstimate out;
  out.j = -weighted / denom;
  out.t_hat = t_hat;
  out.m = z.size();
  out.denom = denom / static_cast<double>(z.size());
  if (!out.j.allFinite()) throw Error(ErrorCode::NonFinite, "gradient estimate is not finite");
  return out;
}

UbsrGradientSample ubsr_and_gradient(const Vector& theta, std::size_t m, const EstimatorConfig& config,
                                     const PortfolioModel& model, const LossFunction& loss, double lambda,
                                     std::uint64_t seed) {
  if (m == 0) throw Error(ErrorCode::InvalidParameter, "batch size must be >= 1");
  if (theta.size() != static_cast<Eigen::Index>(model.dim())) {
    throw Error(ErrorCode::DimensionMismatch, "theta does not match the model dimension");
  }
  const ScenarioBatch z_hat = sample(model, m, derive_seed(seed, {0}));
  const Vector f_hat = z_hat.values * theta;
  const std::vector<double> scalar(f_hat.data(), f_hat.data() + f_hat.size());

  EstimatorConfig local = config;
  local.delta = delta_schedule(m, config);
  UbsrGradientSample out;
  out.estimate = ubsr_sb(scalar, local, loss, lambda);

  // The ratio batch is drawn only after t_hat is fixed.
  const ScenarioBatch z = sample(model, m, derive_seed(seed, {1}));
  out.gradient = estimate_gradient(theta, z, out.estimate.t_hat, model, loss);
  return out;
}

GradientBounds theoretical_gradient_bounds(const BoundInputs& in) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::InvalidParameter, fmt::format("{} must be positive, got {}", name, v));
    }
  };
  auto nonnegative = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::InvalidParameter, fmt::format("{} must be nonnegative, got {}", name, v));
    }
  };
  positive(in.C1, "C1");
  positive(in.C2, "C2");
  positive(in.L1, "L1");
  positive(in.L2, "L2");
  positive(in.M, "M");
  positive(in.d, "d");
  positive(in.b, "b");
  nonnegative(in.d1, "d1");
  nonnegative(in.sigma1, "sigma1");
  nonnegative(in.sigma2, "sigma2");

  const double b2 = in.b * in.b;
  const double d1_hat =
      (2.0 * (in.C1 + in.d1) * in.L1 * in.L2 * in.M + in.L1 * (in.sigma1 * std::sqrt(in.d) + in.M * in.sigma2)) / b2;
  const double L1sq = in.L1 * in.L1;
  const double d2_hat = (8.0 * (in.C2 + in.d1 * in.d1) * L1sq * in.L2 * in.L2 * in.M * in.M +
                         4.0 * L1sq * (in.d * in.sigma1 * in.sigma1 + in.M * in.M * in.sigma2 * in.sigma2)) /
                        (b2 * b2);
  return {d1_hat, d2_hat};
}

}  // namespace srisk
