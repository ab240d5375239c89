#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "srisk/config.hpp"
#include "srisk/estimator.hpp"
#include "srisk/gradient.hpp"
#include "srisk/loss.hpp"
#include "srisk/models.hpp"
#include "srisk/optimizer.hpp"
#include "srisk/stats.hpp"

namespace srisk {

enum class Command { Estimate, RateCheck, GradCheck, Optimize };

struct RunSpec {
  Command command = Command::Estimate;
  std::filesystem::path config_path;
  std::filesystem::path out_dir;
  std::uint64_t seed = 0;
  std::optional<std::size_t> reps;
};

// ---------------------------------------------------------------- estimation

struct EstimateStudyConfig {
  GaussianSource source;
  LossFunction loss = LossFunction::exponential(0.5);
  double lambda = 0.05;
  std::vector<std::size_t> m_list{10, 100, 1000, 10000};
  std::size_t reps = 1000;
  /// d1, schedule and max_doublings; delta is set per m from the schedule
  /// unless `fixed_delta` is given.
  EstimatorConfig estimator;
  std::optional<double> fixed_delta;
  /// Rate-check only: L2 moment bound (defaults to sqrt(mu^2 + sigma^2)) and
  /// the half-width on which loss constants are evaluated.
  std::optional<double> moment_t;
  double domain_halfwidth = 10.0;

  static EstimateStudyConfig from(const Config& cfg);
};

struct ErrorStatsRow {
  std::size_t m;
  std::size_t reps;
  double mean_err;
  double mse;
  double mse_times_m;
  double q05, q25, q50, q75, q95;
};

using ErrorStats = std::vector<ErrorStatsRow>;

/// One replication of the estimation study.
struct Replication {
  std::size_t m;
  std::size_t rep;
  EstimateResult estimate;
  std::optional<double> err;
};

/// Raw replications for one m: rep r uses seed derive_seed(seed, {m, r}).
std::vector<Replication> replicate_estimates(const EstimateStudyConfig& cfg, std::size_t m, std::uint64_t seed);

/// Summary of the errors t_hat - t* (empty when no reference UBSR exists).
ErrorStatsRow summarize_errors(std::size_t m, const std::vector<double>& errors);

/// Runs every m of the list; writes errors_m{m}.csv and summary.csv into
/// `out_dir` when given. Numeric failures are rethrown with (m, rep) context.
ErrorStats run_estimate_study(const EstimateStudyConfig& cfg, std::uint64_t seed,
                              const std::optional<std::filesystem::path>& out_dir = std::nullopt);
ErrorStats run_estimate_study(const RunSpec& spec);

// ---------------------------------------------------------------- rate check

struct RateReport {
  Regime regime;
  std::vector<std::size_t> m;
  std::vector<double> mse;
  LinearFit fit;
  /// exp(intercept): the constant C in mse ~ C m^slope.
  double implied_constant;
  /// C2 = 108 L1^2 T^2 / b^2 (Lipschitz) or C4 = (540 L2^2 + 108 a^2) T^4 / b^2 (smooth).
  double theoretical_constant;
};

/// Needs at least three m values (InsufficientData otherwise). Writes
/// rate.csv and rate_summary.csv when `out_dir` is given.
RateReport run_rate_check(const EstimateStudyConfig& cfg, std::uint64_t seed,
                          const std::optional<std::filesystem::path>& out_dir = std::nullopt);
RateReport run_rate_check(const RunSpec& spec);

// ------------------------------------------------------------ gradient check

struct GradCheckConfig {
  PortfolioModel model;
  LossFunction loss = LossFunction::exponential(0.5);
  double lambda = 0.05;
  std::vector<Vector> thetas{};
  std::vector<std::size_t> m_list{100, 1000, 10000};
  std::size_t reps = 500;
  EstimatorConfig estimator{};

  /// `theta = 1, 1 ; optimum`: semicolon-separated points, `optimum`
  /// resolving to the box minimizer.
  static GradCheckConfig from(const Config& cfg);
};

struct GradCheckRow {
  std::size_t theta_id;
  std::size_t m;
  std::size_t reps;
  double mse;           ///< mean ||J - grad h||^2 (NaN without an exact gradient)
  double mean_sq_norm;  ///< mean ||J||^2
  double bias_l2;       ///< ||mean J - grad h||
};

struct GradCheckReport {
  std::vector<GradCheckRow> rows;
  /// log-log slope of mse against m, one per theta (NaN without an exact gradient).
  std::vector<LinearFit> fits;
};

/// Rep r at (theta_id, m) uses seed derive_seed(seed, {theta_id, m, r}).
GradCheckReport run_grad_check(const GradCheckConfig& cfg, std::uint64_t seed,
                               const std::optional<std::filesystem::path>& out_dir = std::nullopt);
GradCheckReport run_grad_check(const RunSpec& spec);

// -------------------------------------------------------------- optimization

struct OptimizeStudyConfig {
  PortfolioModel model;
  LossFunction loss = LossFunction::exponential(0.5);
  double lambda = 0.05;
  /// Step coefficient; suggest_c when absent (exponential loss only).
  std::optional<double> c{};
  BatchSchedule batch = BatchSchedule::linear();
  std::size_t n_iters = 1000;
  double d1 = 1.0;
  /// Defaults to the projection of the origin onto the box.
  std::optional<Vector> theta0{};
  std::size_t seeds = 20;

  static OptimizeStudyConfig from(const Config& cfg);
};

struct EnvelopeRow {
  std::size_t k;
  double median_dist_sq;
  double median_h_gap;
};

struct OptimizeReport {
  std::optional<Vector> theta_star;
  double c;
  std::vector<SGTrace> traces;
  std::vector<EnvelopeRow> envelope;
  /// trend_violations of the median dist_sq envelope (needs theta_star).
  std::optional<std::size_t> trend_violations;
};

/// Seed s runs with derive_seed(seed, {s}); writes trace_seed{s}.csv and
/// summary.csv (θ* in a leading comment line) when `out_dir` is given.
OptimizeReport run_optimize_study(const OptimizeStudyConfig& cfg, std::uint64_t seed,
                                  const std::optional<std::filesystem::path>& out_dir = std::nullopt);
OptimizeReport run_optimize_study(const RunSpec& spec);

}  // namespace srisk
