#include "srisk/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <fmt/format.h>

#include "srisk/error.hpp"

namespace srisk {
namespace {

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

double empirical_g(std::span<const double> samples, double t, const LossFunction& loss, double lambda) {
  if (samples.empty()) throw Error(ErrorCode::InvalidParameter, "empirical g needs a nonempty batch");
  double sum = 0.0;
  double compensation = 0.0;
  for (const double z : samples) {
    const double term = loss(-z - t);
    const double next = sum + term;
    if (std::abs(sum) >= std::abs(term)) {
      compensation += (sum - next) + term;
    } else {
      compensation += (term - next) + sum;
    }
    sum = next;
  }
  return (sum + compensation) / static_cast<double>(samples.size()) - lambda;
}

EstimateResult ubsr_sb(std::span<const double> samples, const EstimatorConfig& config, const LossFunction& loss,
                       double lambda) {
  if (samples.empty()) throw Error(ErrorCode::InvalidParameter, "estimator needs a nonempty batch");
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidParameter, fmt::format("lambda must be positive, got {}", lambda));
  if (!(config.delta > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, fmt::format("delta must be positive, got {}", config.delta));
  }
  auto g = [&](double t) { return empirical_g(samples, t, loss, lambda); };

  EstimateResult result;
  result.delta = config.delta;
  result.m = samples.size();

  const double g0 = sign(g(0.0));
  double low = std::min(0.0, g0);
  double high = std::max(0.0, g0);

  // Only the side that starts at +-1 can grow: a zero endpoint doubles to zero
  // and its g-test already fails.
  while (high != 0.0 && g(high) > 0.0) {
    if (result.iters_search == config.max_doublings) {
      throw Error(ErrorCode::BracketNotFound,
                  fmt::format("g still positive at t = {} after {} doublings", high, config.max_doublings));
    }
    high *= 2.0;
    ++result.iters_search;
  }
  while (low != 0.0 && g(low) < 0.0) {
    if (result.iters_search == config.max_doublings) {
      throw Error(ErrorCode::BracketNotFound,
                  fmt::format("g still negative at t = {} after {} doublings", low, config.max_doublings));
    }
    low *= 2.0;
    ++result.iters_search;
  }

  double width = high - low;
  double t_hat = 0.5 * (low + high);
  while (width > 2.0 * config.delta) {
    // A midpoint equal to an endpoint means the bracket is already one ulp wide.
    if (t_hat <= low || t_hat >= high) break;
    if (g(t_hat) > 0.0) {
      low = t_hat;
    } else {
      high = t_hat;
    }
    ++result.iters_bisect;
    width = high - low;
    t_hat = 0.5 * (low + high);
  }

  result.t_hat = t_hat;
  result.bracket = {low, high};
  return result;
}

double exp_loss_saa_oracle(std::span<const double> samples, double beta, double lambda) {
  if (samples.empty()) throw Error(ErrorCode::InvalidParameter, "oracle needs a nonempty batch");
  if (!(beta > 0.0) || !(lambda > 0.0)) throw Error(ErrorCode::InvalidParameter, "oracle needs beta, lambda > 0");
  double shift = -std::numeric_limits<double>::infinity();
  for (const double z : samples) {
    if (!std::isfinite(z)) throw Error(ErrorCode::NonFinite, "oracle sample is not finite");
    shift = std::max(shift, -beta * z);
  }
  if (shift > kExpArgumentGuard) {
    throw Error(ErrorCode::OverflowGuard, fmt::format("exponent {} exceeds guard {}", shift, kExpArgumentGuard));
  }
  double sum = 0.0;
  for (const double z : samples) sum += std::exp(-beta * z - shift);
  const double log_mean = shift + std::log(sum / static_cast<double>(samples.size()));
  return (log_mean - std::log(lambda)) / beta;
}

double delta_schedule(std::size_t m, const EstimatorConfig& config) {
  const auto mm = static_cast<double>(m);
  switch (config.schedule) {
    case DeltaSchedule::InverseSqrt: return config.d1 / std::sqrt(mm);
    case DeltaSchedule::InverseQuarterPower: return config.d1 / std::sqrt(std::sqrt(mm));
  }
  return config.d1 / std::sqrt(mm);
}

double wasserstein_1d(std::span<const double> x, std::span<const double> y, int p) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::SizeMismatch, fmt::format("batch sizes differ: {} vs {}", x.size(), y.size()));
  }
  if (x.empty()) throw Error(ErrorCode::InvalidParameter, "wasserstein distance of empty batches");
  if (p != 1 && p != 2) throw Error(ErrorCode::InvalidParameter, fmt::format("p must be 1 or 2, got {}", p));
  std::vector<double> xs(x.begin(), x.end());
  std::vector<double> ys(y.begin(), y.end());
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  double cost = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double diff = std::abs(xs[i] - ys[i]);
    cost += p == 1 ? diff : diff * diff;
  }
  cost /= static_cast<double>(xs.size());
  return p == 1 ? cost : std::sqrt(cost);
}

}  // namespace srisk
