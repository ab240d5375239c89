#pragma once

#include <string>
#include <string_view>
#include <variant>

namespace srisk {

/// Largest admissible exponent for the exponential family. Beyond it
/// evaluation raises OverflowGuard instead of returning +inf.
inline constexpr double kExpArgumentGuard = 700.0;

/// l(x) = exp(beta x).
struct Exponential {
  double beta;
};

/// l(x) = x^p / p for x >= 0, 0 otherwise.
///
/// The derivative vanishes on the negative half-line, so the growth constant
/// b only exists on a sub-domain [floor, R]; `floor` declares that lower end.
struct PolynomialPositivePart {
  double p;
  double floor = 0.1;
};

/// l(x) = slope_pos * x for x > 0, slope_neg * x otherwise.
/// The derivative at the kink is slope_neg.
struct PiecewiseLinear {
  double slope_pos;
  double slope_neg;
};

/// An increasing scalar loss with its derivative. Immutable after construction.
class LossFunction {
 public:
  using Family = std::variant<Exponential, PolynomialPositivePart, PiecewiseLinear>;

  /// Throws InvalidParameter unless beta > 0, p > 1 (floor > 0), or
  /// slope_pos >= slope_neg > 0.
  explicit LossFunction(Family family);

  static LossFunction exponential(double beta) { return LossFunction(Exponential{beta}); }
  static LossFunction polynomial(double p, double floor = 0.1) {
    return LossFunction(PolynomialPositivePart{p, floor});
  }
  static LossFunction piecewise(double slope_pos, double slope_neg) {
    return LossFunction(PiecewiseLinear{slope_pos, slope_neg});
  }

  double operator()(double x) const;
  double derivative(double x) const;

  const Family& family() const noexcept { return family_; }
  bool is_exponential() const noexcept { return std::holds_alternative<Exponential>(family_); }
  /// beta of the exponential family; throws InvalidParameter otherwise.
  double exponential_beta() const;

  /// Canonical text form, e.g. `exponential(beta=0.5)`.
  std::string describe() const;

 private:
  Family family_;
};

/// l(x). Throws NonFinite for NaN/inf input and OverflowGuard when the
/// exponential argument exceeds kExpArgumentGuard.
double eval(const LossFunction& loss, double x);
/// l'(x), same error contract as eval.
double eval_derivative(const LossFunction& loss, double x);

enum class Regime { Lipschitz, Smooth };

/// Regularity constants. Lipschitz regime uses L1 and b; the smooth regime
/// uses L2, the sub-linear derivative slope a and offset b_sub (l'(x) <= a|x| + b_sub),
/// and b. b is always the growth lower bound l(y) - l(x) >= b (y - x).
struct LossConstants {
  Regime regime = Regime::Lipschitz;
  double L1 = 0.0;
  double L2 = 0.0;
  double a = 0.0;
  double b_sub = 0.0;
  double b = 0.0;
};

/// Constants of `loss` on [-R, R] with R = domain_halfwidth. Exact and
/// domain-independent for the piecewise family; effective on the interval
/// for the others. Throws InvalidDomain if R <= 0.
LossConstants constants(const LossFunction& loss, double domain_halfwidth = 10.0);

/// Parses `exponential(beta=..)`, `polynomial(p=..[, floor=..])` or
/// `piecewise(pos=.., neg=..)`. Throws ConfigError.
LossFunction parse_loss(std::string_view text);

}  // namespace srisk
