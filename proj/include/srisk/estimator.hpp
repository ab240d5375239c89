#pragma once

#include <cstddef>
#include <span>

#include "srisk/loss.hpp"

namespace srisk {

/// How the bisection tolerance shrinks with the sample count.
enum class DeltaSchedule {
  InverseSqrt,          ///< delta = d1 / sqrt(m), Lipschitz losses
  InverseQuarterPower,  ///< delta = d1 / m^(1/4), smooth losses
};

struct EstimatorConfig {
  double delta = 1e-6;
  double d1 = 1.0;
  DeltaSchedule schedule = DeltaSchedule::InverseSqrt;
  int max_doublings = 60;
};

struct Bracket {
  double low;
  double high;
};

/// Output of the search-and-bisect estimator. On return
/// g(low) >= 0 >= g(high), high - low <= 2 delta and low <= t_hat <= high.
struct EstimateResult {
  double t_hat = 0.0;
  double delta = 0.0;
  Bracket bracket{0.0, 0.0};
  int iters_search = 0;
  int iters_bisect = 0;
  std::size_t m = 0;
};

/// g(t) = (1/m) sum_i l(-Z_i - t) - lambda, accumulated with Neumaier
/// compensated summation.
double empirical_g(std::span<const double> samples, double t, const LossFunction& loss, double lambda);

/// Search-and-bisect root of the empirical g.
///
/// Starts from low = min(0, sign g(0)), high = max(0, sign g(0)) (sign(0) = 0,
/// so a root at the origin returns immediately), doubles `high` while
/// g(high) > 0 and `low` while g(low) < 0, then bisects until the bracket is
/// no wider than 2 delta and returns its midpoint.
///
/// Throws InvalidParameter (empty batch, lambda <= 0, delta <= 0),
/// BracketNotFound when max_doublings is exhausted, and propagates loss
/// overflow errors.
EstimateResult ubsr_sb(std::span<const double> samples, const EstimatorConfig& config, const LossFunction& loss,
                       double lambda);

/// Closed-form SAA root for l(x) = exp(beta x):
/// (1/beta) ln((1/m) sum_i exp(-beta Z_i) / lambda), via a max-shifted log-sum-exp.
double exp_loss_saa_oracle(std::span<const double> samples, double beta, double lambda);

/// d1 / sqrt(m) or d1 / m^(1/4) depending on the schedule.
double delta_schedule(std::size_t m, const EstimatorConfig& config);

/// Exact p-Wasserstein distance (p in {1, 2}) between two equal-size,
/// equal-weight empirical measures: p-mean of sorted differences.
/// Throws SizeMismatch or InvalidParameter.
double wasserstein_1d(std::span<const double> x, std::span<const double> y, int p);

}  // namespace srisk
