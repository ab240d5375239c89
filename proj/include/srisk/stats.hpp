#pragma once

#include <span>
#include <vector>

namespace srisk {

double mean(std::span<const double> v);
double median(std::vector<double> v);
/// Linear-interpolation quantile (Hyndman-Fan type 7), q in [0, 1].
double quantile(std::vector<double> v, double q);

struct LinearFit {
  double slope;
  double intercept;
};

/// Ordinary least squares y = intercept + slope x. Throws InsufficientData
/// for fewer than two points.
LinearFit ols_fit(std::span<const double> x, std::span<const double> y);

/// OLS fit of log(y) against log(x).
LinearFit loglog_fit(std::span<const double> x, std::span<const double> y);

}  // namespace srisk
