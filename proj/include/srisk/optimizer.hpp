#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "srisk/loss.hpp"
#include "srisk/models.hpp"

namespace srisk {

/// Per-iteration sample count m_k.
struct BatchSchedule {
  enum class Kind { Constant, Linear };
  Kind kind = Kind::Linear;
  std::size_t m = 1;

  static BatchSchedule constant(std::size_t m) { return {Kind::Constant, m}; }
  static BatchSchedule linear() { return {Kind::Linear, 0}; }
};

struct SGConfig {
  double c = 1.0;  ///< alpha_k = c / k
  BatchSchedule batch = BatchSchedule::linear();
  std::size_t n_iters = 1000;
  double d1 = 1.0;  ///< delta_k = d1 / sqrt(m_k)
  Vector theta0;
  std::uint64_t seed = 0;
  int max_doublings = 60;
  /// Known minimizer; enables dist_sq (and h_gap for the exponential loss).
  std::optional<Vector> theta_star;
};

struct SGRecord {
  std::size_t k = 0;
  Vector theta;  ///< theta_k after projection
  double alpha = 0.0;
  std::size_t m_k = 0;
  double delta_k = 0.0;
  double t_hat = 0.0;
  Vector grad;  ///< J^k
  double grad_norm = 0.0;
  std::optional<double> dist_sq;
  std::optional<double> h_gap;
};

struct SGTrace {
  std::vector<SGRecord> records;
  Vector theta_final;
  std::vector<std::string> warnings;
};

/// Append-only trace CSV, flushed every 50 records and on destruction.
/// Columns: k, alpha, m_k, delta_k, t_hat, theta_1..theta_d, grad_1..grad_d, dist_sq, h_gap.
class TraceCsvWriter {
 public:
  TraceCsvWriter(const std::filesystem::path& path, std::size_t dim);

  void write(const SGRecord& record);

 private:
  std::ofstream out_;
  std::size_t pending_ = 0;
};

/// Euclidean projection onto the box (componentwise clamp). Throws DimensionMismatch.
Vector project_box(const Vector& x, const Box& box);

/// c / k. Throws InvalidParameter for k == 0.
double step_size(std::size_t k, double c);

/// k for the linear schedule, m for the constant one.
std::size_t batch_size(std::size_t k, const BatchSchedule& schedule);

/// beta * lambda_min(Sigma), the curvature floor of the exponential-loss objective.
double strong_convexity_constant(const PortfolioModel& model, double beta);

/// 2 / mu_sc, the midpoint of the admissible interval [1/mu_sc, 3/mu_sc].
double suggest_c(const PortfolioModel& model, double beta);

/// ||theta - Pi(theta - grad)||_2, zero exactly at box-constrained stationary points.
double gradient_map_norm(const Vector& theta, const Vector& grad, const Box& box);

/// Projected stochastic gradient on the UBSR of the portfolio return.
///
/// Iteration k draws an m_k batch for t^k (ubsr_sb, delta_k = d1/sqrt(m_k)),
/// an independent m_k batch for J^k, and sets
/// theta_k = Pi(theta_{k-1} - (c/k) J^k). Every record is also passed to
/// `sink` when given. Throws InvalidStart if theta0 is outside the box;
/// estimator and gradient errors are rethrown with the iteration index.
SGTrace ubsr_sg(const SGConfig& config, const PortfolioModel& model, const LossFunction& loss, double lambda,
                TraceCsvWriter* sink = nullptr);

/// Number of k >= start (stepping by `window`) where the median of the
/// trailing `window` dist_sq values exceeds `factor` times the median of the
/// preceding window.
std::size_t trend_violations(const SGTrace& trace, std::size_t window = 50, std::size_t start = 100,
                             double factor = 1.5);

/// Same check on a bare series, e.g. the across-seed median of dist_sq;
/// index i holds iteration i + 1. Single traces are noisy enough that the
/// diagnostic is meant for such envelopes.
std::size_t trend_violations(std::span<const double> dist_sq, std::size_t window = 50, std::size_t start = 100,
                             double factor = 1.5);

}  // namespace srisk
