#include "srisk/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <variant>

#include <fmt/format.h>

#include "srisk/error.hpp"
#include "srisk/rng.hpp"

namespace srisk {
namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw Error(ErrorCode::InvalidParameter, fmt::format("{} must be positive and finite, got {}", name, value));
  }
}

void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) throw Error(ErrorCode::DimensionMismatch, fmt::format("{}: {} vs {}", what, a, b));
}

Vector clamp_to_box(const Vector& x, const Box& box) {
  Vector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    out[i] = std::clamp(x[i], box[static_cast<std::size_t>(i)].lo, box[static_cast<std::size_t>(i)].hi);
  }
  return out;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

// Root of a strictly decreasing function, bisected until the interval stops shrinking.
template <class G>
double decreasing_root(G&& g) {
  double lo = -1.0;
  double hi = 1.0;
  for (int i = 0; g(hi) > 0.0; ++i) {
    if (i > 1100) throw Error(ErrorCode::BracketNotFound, "reference root: no upper bracket");
    hi *= 2.0;
  }
  for (int i = 0; g(lo) < 0.0; ++i) {
    if (i > 1100) throw Error(ErrorCode::BracketNotFound, "reference root: no lower bracket");
    lo *= 2.0;
  }
  while (true) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) return mid;
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
}

}  // namespace

PortfolioModel::PortfolioModel(Vector mu, Matrix sigma, Box box)
    : mu_(std::move(mu)), sigma_(std::move(sigma)), box_(std::move(box)) {
  const Eigen::Index d = mu_.size();
  if (d == 0) throw Error(ErrorCode::InvalidParameter, "portfolio model needs d >= 1");
  require_same_dim(sigma_.rows(), d, "sigma rows vs mu");
  require_same_dim(sigma_.cols(), d, "sigma cols vs mu");
  require_same_dim(static_cast<Eigen::Index>(box_.size()), d, "box vs mu");
  if (!mu_.allFinite() || !sigma_.allFinite()) throw Error(ErrorCode::InvalidParameter, "non-finite model entries");
  const double scale = std::max(1.0, sigma_.cwiseAbs().maxCoeff());
  if ((sigma_ - sigma_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw Error(ErrorCode::InvalidParameter, "sigma is not symmetric");
  }
  for (std::size_t i = 0; i < box_.size(); ++i) {
    if (!(box_[i].lo <= box_[i].hi) || !std::isfinite(box_[i].lo) || !std::isfinite(box_[i].hi)) {
      throw Error(ErrorCode::InvalidParameter, fmt::format("box interval {} is not a finite lo <= hi pair", i));
    }
  }
  Eigen::LLT<Matrix> llt(sigma_);
  chol_ = llt.matrixL();
  if (llt.info() != Eigen::Success || !(chol_.diagonal().array() > 0.0).all()) {
    throw Error(ErrorCode::FactorizationFailure, "sigma is not positive definite");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma_, Eigen::EigenvaluesOnly);
  eig_min_ = eig.eigenvalues().minCoeff();
  eig_max_ = eig.eigenvalues().maxCoeff();
  if (!(eig_min_ > 0.0)) throw Error(ErrorCode::FactorizationFailure, "sigma has a nonpositive eigenvalue");
}

SampleBatch sample(const GaussianSource& source, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::InvalidParameter, "sample size must be >= 1");
  require_positive(source.sigma, "sigma");
  NormalStream normals(seed);
  SampleBatch batch;
  batch.seed_tag = seed;
  batch.values.resize(n);
  for (double& v : batch.values) v = source.mu + source.sigma * normals.next();
  return batch;
}

ScenarioBatch sample(const PortfolioModel& model, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::InvalidParameter, "sample size must be >= 1");
  const auto d = static_cast<Eigen::Index>(model.dim());
  NormalStream normals(seed);
  Matrix z(static_cast<Eigen::Index>(n), d);
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) z(i, j) = normals.next();
  }
  ScenarioBatch batch;
  batch.seed_tag = seed;
  batch.values = z * model.cholesky().transpose();
  batch.values.rowwise() += model.mu().transpose();
  return batch;
}

double portfolio_value(const Vector& theta, const Vector& xi) {
  require_same_dim(theta.size(), xi.size(), "theta vs xi");
  return xi.dot(theta);
}

Vector portfolio_grad(const Vector& theta, const Vector& xi) {
  require_same_dim(theta.size(), xi.size(), "theta vs xi");
  return xi;
}

double gaussian_ubsr_oracle(double mu, double sigma, double beta, double lambda) {
  require_positive(sigma, "sigma");
  require_positive(beta, "beta");
  require_positive(lambda, "lambda");
  return -mu + beta * sigma * sigma / 2.0 - std::log(lambda) / beta;
}

double portfolio_ubsr_oracle(const Vector& theta, const PortfolioModel& model, double beta, double lambda) {
  require_same_dim(theta.size(), static_cast<Eigen::Index>(model.dim()), "theta vs model");
  require_positive(beta, "beta");
  require_positive(lambda, "lambda");
  return -model.mu().dot(theta) + beta * theta.dot(model.sigma() * theta) / 2.0 - std::log(lambda) / beta;
}

Vector portfolio_ubsr_gradient_oracle(const Vector& theta, const PortfolioModel& model, double beta) {
  require_same_dim(theta.size(), static_cast<Eigen::Index>(model.dim()), "theta vs model");
  require_positive(beta, "beta");
  return -model.mu() + beta * (model.sigma() * theta);
}

Vector portfolio_argmin_oracle(const PortfolioModel& model, double beta) {
  require_positive(beta, "beta");
  const Box& box = model.box();
  const Matrix hessian = beta * model.sigma();
  const double lipschitz = beta * model.max_eigenvalue();
  const double step = 1.0 / lipschitz;
  auto gradient = [&](const Vector& th) { return Vector(-model.mu() + hessian * th); };

  Vector theta = clamp_to_box(Vector::Zero(static_cast<Eigen::Index>(model.dim())), box);
  constexpr long kMaxIterations = 1'000'000;
  long iter = 0;
  for (;; ++iter) {
    if (iter == kMaxIterations) {
      throw Error(ErrorCode::NonConvergence, "projected gradient did not reach gradient-map norm 1e-10");
    }
    const Vector next = clamp_to_box(theta - step * gradient(theta), box);
    const double gradient_map = lipschitz * (theta - next).norm();
    theta = next;
    if (gradient_map <= 1e-10) break;
  }

  // Active-set polish: coordinates strictly inside the box are solved from
  // the reduced linear system with the others pinned at their bounds.
  const auto d = theta.size();
  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < d; ++i) {
    const auto& iv = box[static_cast<std::size_t>(i)];
    if (theta[i] > iv.lo && theta[i] < iv.hi) free.push_back(i);
  }
  if (free.empty()) return theta;
  const auto nf = static_cast<Eigen::Index>(free.size());
  Matrix reduced(nf, nf);
  Vector rhs(nf);
  const Vector residual = -model.mu() + hessian * theta;
  for (Eigen::Index a = 0; a < nf; ++a) {
    rhs[a] = -residual[free[static_cast<std::size_t>(a)]];
    for (Eigen::Index b = 0; b < nf; ++b) {
      reduced(a, b) = hessian(free[static_cast<std::size_t>(a)], free[static_cast<std::size_t>(b)]);
    }
  }
  const Vector correction = reduced.llt().solve(rhs);
  Vector polished = theta;
  for (Eigen::Index a = 0; a < nf; ++a) polished[free[static_cast<std::size_t>(a)]] += correction[a];
  if (clamp_to_box(polished, box) != polished) return theta;
  const Vector g = gradient(polished);
  for (Eigen::Index i = 0; i < d; ++i) {
    const auto& iv = box[static_cast<std::size_t>(i)];
    const bool at_lo = polished[i] == iv.lo && iv.lo < iv.hi;
    const bool at_hi = polished[i] == iv.hi && iv.lo < iv.hi;
    // KKT: at a lower bound the gradient must push outward (g >= 0), at an upper bound g <= 0.
    if ((at_lo && g[i] < -1e-9) || (at_hi && g[i] > 1e-9)) return theta;
  }
  return polished;
}

double gaussian_ubsr_reference(const GaussianSource& source, const LossFunction& loss, double lambda) {
  require_positive(source.sigma, "sigma");
  require_positive(lambda, "lambda");
  const double sigma = source.sigma;
  if (const auto* f = std::get_if<Exponential>(&loss.family())) {
    return gaussian_ubsr_oracle(source.mu, sigma, f->beta, lambda);
  }
  // Y = -X - t ~ N(-mu - t, sigma^2).
  if (const auto* f = std::get_if<PiecewiseLinear>(&loss.family())) {
    return decreasing_root([&](double t) {
      const double m = -source.mu - t;
      const double z = m / sigma;
      const double positive_part = m * normal_cdf(z) + sigma * normal_pdf(z);
      return f->slope_neg * m + (f->slope_pos - f->slope_neg) * positive_part - lambda;
    });
  }
  if (const auto* f = std::get_if<PolynomialPositivePart>(&loss.family()); f && f->p == 2.0) {
    return decreasing_root([&](double t) {
      const double m = -source.mu - t;
      const double z = m / sigma;
      const double second_moment = (m * m + sigma * sigma) * normal_cdf(z) + m * sigma * normal_pdf(z);
      return 0.5 * second_moment - lambda;
    });
  }
  throw Error(ErrorCode::InvalidParameter, "no Gaussian reference UBSR for " + loss.describe());
}

}  // namespace srisk
