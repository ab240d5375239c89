#include "srisk/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "srisk/error.hpp"
#include "srisk/estimator.hpp"
#include "srisk/gradient.hpp"
#include "srisk/rng.hpp"

namespace srisk {
namespace {

double median_of(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  return 0.5 * (*mid + *std::max_element(v.begin(), mid));
}

}  // namespace

TraceCsvWriter::TraceCsvWriter(const std::filesystem::path& path, std::size_t dim) : out_(path) {
  if (!out_) throw Error(ErrorCode::InvalidParameter, "cannot open trace file " + path.string());
  out_ << "k,alpha,m_k,delta_k,t_hat";
  for (std::size_t i = 1; i <= dim; ++i) out_ << ",theta_" << i;
  for (std::size_t i = 1; i <= dim; ++i) out_ << ",grad_" << i;
  out_ << ",dist_sq,h_gap\n";
}

void TraceCsvWriter::write(const SGRecord& r) {
  out_ << fmt::format("{},{:.17g},{},{:.17g},{:.17g}", r.k, r.alpha, r.m_k, r.delta_k, r.t_hat);
  for (const double v : r.theta) out_ << fmt::format(",{:.17g}", v);
  for (const double v : r.grad) out_ << fmt::format(",{:.17g}", v);
  out_ << ',' << (r.dist_sq ? fmt::format("{:.17g}", *r.dist_sq) : "");
  out_ << ',' << (r.h_gap ? fmt::format("{:.17g}", *r.h_gap) : "") << '\n';
  if (++pending_ == 50) {
    out_.flush();
    pending_ = 0;
  }
}

Vector project_box(const Vector& x, const Box& box) {
  if (static_cast<std::size_t>(x.size()) != box.size()) {
    throw Error(ErrorCode::DimensionMismatch, fmt::format("point has {} entries, box {}", x.size(), box.size()));
  }
  Vector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const auto& iv = box[static_cast<std::size_t>(i)];
    out[i] = std::clamp(x[i], iv.lo, iv.hi);
  }
  return out;
}

double step_size(std::size_t k, double c) {
  if (k == 0) throw Error(ErrorCode::InvalidParameter, "iteration index starts at 1");
  return c / static_cast<double>(k);
}

std::size_t batch_size(std::size_t k, const BatchSchedule& schedule) {
  return schedule.kind == BatchSchedule::Kind::Linear ? k : schedule.m;
}

double strong_convexity_constant(const PortfolioModel& model, double beta) {
  if (!(beta > 0.0)) throw Error(ErrorCode::InvalidParameter, "beta must be positive");
  return beta * model.min_eigenvalue();
}

double suggest_c(const PortfolioModel& model, double beta) { return 2.0 / strong_convexity_constant(model, beta); }

double gradient_map_norm(const Vector& theta, const Vector& grad, const Box& box) {
  return (theta - project_box(theta - grad, box)).norm();
}

SGTrace ubsr_sg(const SGConfig& config, const PortfolioModel& model, const LossFunction& loss, double lambda,
                TraceCsvWriter* sink) {
  if (!(config.c > 0.0)) throw Error(ErrorCode::InvalidParameter, "step coefficient c must be positive");
  if (!(config.d1 > 0.0)) throw Error(ErrorCode::InvalidParameter, "d1 must be positive");
  if (config.n_iters == 0) throw Error(ErrorCode::InvalidParameter, "n_iters must be >= 1");
  if (config.batch.kind == BatchSchedule::Kind::Constant && config.batch.m == 0) {
    throw Error(ErrorCode::InvalidParameter, "constant batch size must be >= 1");
  }
  if (static_cast<std::size_t>(config.theta0.size()) != model.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "theta0 does not match the model dimension");
  }
  if (project_box(config.theta0, model.box()) != config.theta0) {
    throw Error(ErrorCode::InvalidStart, "theta0 lies outside the box");
  }
  if (config.theta_star && static_cast<std::size_t>(config.theta_star->size()) != model.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "theta_star does not match the model dimension");
  }

  SGTrace trace;
  std::optional<double> h_star;
  double beta = 0.0;
  if (loss.is_exponential()) {
    beta = loss.exponential_beta();
    const double mu_c = strong_convexity_constant(model, beta) * config.c;
    if (mu_c < 1.0 || mu_c > 3.0) {
      trace.warnings.push_back(fmt::format("mu_sc * c = {} lies outside [1, 3]", mu_c));
    }
    if (config.theta_star) h_star = portfolio_ubsr_oracle(*config.theta_star, model, beta, lambda);
  }

  EstimatorConfig est;
  est.d1 = config.d1;
  est.schedule = DeltaSchedule::InverseSqrt;
  est.max_doublings = config.max_doublings;

  trace.records.reserve(config.n_iters);
  Vector theta = config.theta0;
  for (std::size_t k = 1; k <= config.n_iters; ++k) {
    const std::size_t m_k = batch_size(k, config.batch);
    const double alpha = step_size(k, config.c);
    UbsrGradientSample step;
    try {
      step = ubsr_and_gradient(theta, m_k, est, model, loss, lambda, derive_seed(config.seed, {k}));
    } catch (const Error& e) {
      throw Error(e.code(), fmt::format("iteration {}: {}", k, e.detail()));
    }
    theta = project_box(theta - alpha * step.gradient.j, model.box());

    SGRecord r;
    r.k = k;
    r.theta = theta;
    r.alpha = alpha;
    r.m_k = m_k;
    r.delta_k = step.estimate.delta;
    r.t_hat = step.estimate.t_hat;
    r.grad = step.gradient.j;
    r.grad_norm = step.gradient.j.norm();
    if (config.theta_star) r.dist_sq = (theta - *config.theta_star).squaredNorm();
    if (h_star) r.h_gap = portfolio_ubsr_oracle(theta, model, beta, lambda) - *h_star;
    if (sink) sink->write(r);
    trace.records.push_back(std::move(r));
  }
  trace.theta_final = theta;
  return trace;
}

std::size_t trend_violations(const SGTrace& trace, std::size_t window, std::size_t start, double factor) {
  std::vector<double> dist;
  dist.reserve(trace.records.size());
  for (const auto& r : trace.records) {
    if (!r.dist_sq) throw Error(ErrorCode::InvalidParameter, "trend check needs dist_sq in the trace");
    dist.push_back(*r.dist_sq);
  }
  return trend_violations(dist, window, start, factor);
}

std::size_t trend_violations(std::span<const double> dist, std::size_t window, std::size_t start, double factor) {
  if (window == 0) throw Error(ErrorCode::InvalidParameter, "trend window must be >= 1");
  std::size_t violations = 0;
  for (std::size_t k = std::max(start, 2 * window); k <= dist.size(); k += window) {
    const double current = median_of({dist.begin() + static_cast<std::ptrdiff_t>(k - window),
                                      dist.begin() + static_cast<std::ptrdiff_t>(k)});
    const double previous = median_of({dist.begin() + static_cast<std::ptrdiff_t>(k - 2 * window),
                                       dist.begin() + static_cast<std::ptrdiff_t>(k - window)});
    if (current > factor * previous) ++violations;
  }
  return violations;
}

}  // namespace srisk
