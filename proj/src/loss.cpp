#include "srisk/loss.hpp"

#include <cmath>

#include <fmt/format.h>

#include "srisk/call_expr.hpp"
#include "srisk/error.hpp"

namespace srisk {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_finite(double x) {
  if (!std::isfinite(x)) throw Error(ErrorCode::NonFinite, fmt::format("loss argument {} is not finite", x));
}

double guarded_exp(double arg) {
  if (arg > kExpArgumentGuard) {
    throw Error(ErrorCode::OverflowGuard, fmt::format("exponent {} exceeds guard {}", arg, kExpArgumentGuard));
  }
  return std::exp(arg);
}

double check_result(double value, double x) {
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::OverflowGuard, fmt::format("loss value overflows at x = {}", x));
  }
  return value;
}

}  // namespace

LossFunction::LossFunction(Family family) : family_(family) {
  std::visit(Overloaded{
                 [](const Exponential& f) {
                   if (!(f.beta > 0.0) || !std::isfinite(f.beta))
                     throw Error(ErrorCode::InvalidParameter, "exponential loss needs beta > 0");
                 },
                 [](const PolynomialPositivePart& f) {
                   if (!(f.p > 1.0) || !std::isfinite(f.p))
                     throw Error(ErrorCode::InvalidParameter, "polynomial loss needs p > 1");
                   if (!(f.floor > 0.0) || !std::isfinite(f.floor))
                     throw Error(ErrorCode::InvalidParameter, "polynomial loss needs floor > 0");
                 },
                 [](const PiecewiseLinear& f) {
                   if (!(f.slope_neg > 0.0) || !(f.slope_pos >= f.slope_neg) || !std::isfinite(f.slope_pos))
                     throw Error(ErrorCode::InvalidParameter, "piecewise loss needs slope_pos >= slope_neg > 0");
                 },
             },
             family_);
}

double LossFunction::operator()(double x) const {
  check_finite(x);
  return std::visit(Overloaded{
                        [x](const Exponential& f) { return guarded_exp(f.beta * x); },
                        [x](const PolynomialPositivePart& f) {
                          return x > 0.0 ? check_result(std::pow(x, f.p) / f.p, x) : 0.0;
                        },
                        [x](const PiecewiseLinear& f) { return x > 0.0 ? f.slope_pos * x : f.slope_neg * x; },
                    },
                    family_);
}

double LossFunction::derivative(double x) const {
  check_finite(x);
  return std::visit(Overloaded{
                        [x](const Exponential& f) { return f.beta * guarded_exp(f.beta * x); },
                        [x](const PolynomialPositivePart& f) {
                          return x > 0.0 ? check_result(std::pow(x, f.p - 1.0), x) : 0.0;
                        },
                        [x](const PiecewiseLinear& f) { return x > 0.0 ? f.slope_pos : f.slope_neg; },
                    },
                    family_);
}

double LossFunction::exponential_beta() const {
  if (const auto* f = std::get_if<Exponential>(&family_)) return f->beta;
  throw Error(ErrorCode::InvalidParameter, "closed form requires the exponential loss, got " + describe());
}

std::string LossFunction::describe() const {
  return std::visit(Overloaded{
                        [](const Exponential& f) { return fmt::format("exponential(beta={})", f.beta); },
                        [](const PolynomialPositivePart& f) {
                          return fmt::format("polynomial(p={}, floor={})", f.p, f.floor);
                        },
                        [](const PiecewiseLinear& f) {
                          return fmt::format("piecewise(pos={}, neg={})", f.slope_pos, f.slope_neg);
                        },
                    },
                    family_);
}

double eval(const LossFunction& loss, double x) { return loss(x); }

double eval_derivative(const LossFunction& loss, double x) { return loss.derivative(x); }

LossConstants constants(const LossFunction& loss, double domain_halfwidth) {
  const double R = domain_halfwidth;
  if (!(R > 0.0) || !std::isfinite(R)) {
    throw Error(ErrorCode::InvalidDomain, fmt::format("domain half-width must be positive, got {}", R));
  }
  return std::visit(
      Overloaded{
          [](const PiecewiseLinear& f) {
            LossConstants c;
            c.regime = Regime::Lipschitz;
            c.L1 = f.slope_pos;
            c.b = f.slope_neg;
            return c;
          },
          [R](const Exponential& f) {
            LossConstants c;
            c.regime = Regime::Smooth;
            c.L2 = f.beta * f.beta * std::exp(f.beta * R);
            c.a = 0.0;
            c.b_sub = f.beta * std::exp(f.beta * R);
            c.b = f.beta * std::exp(-f.beta * R);
            return c;
          },
          [R](const PolynomialPositivePart& f) {
            // l'' = (p-1) x^(p-2) is bounded on [0, R] only for p >= 2.
            if (f.p < 2.0) {
              throw Error(ErrorCode::InvalidParameter,
                          fmt::format("polynomial loss with p = {} < 2 is not L2-smooth", f.p));
            }
            if (f.floor >= R) {
              throw Error(ErrorCode::InvalidDomain,
                          fmt::format("declared floor {} must lie inside (0, R = {})", f.floor, R));
            }
            LossConstants c;
            c.regime = Regime::Smooth;
            c.L2 = (f.p - 1.0) * std::pow(R, f.p - 2.0);
            c.a = std::pow(R, f.p - 2.0);
            c.b = std::pow(f.floor, f.p - 1.0);
            c.b_sub = c.b;
            return c;
          },
      },
      loss.family());
}

LossFunction parse_loss(std::string_view text) {
  const CallExpr expr = parse_call(text);
  try {
    if (expr.name == "exponential") {
      expr.check_keys({"beta"});
      return LossFunction::exponential(expr.require("beta"));
    }
    if (expr.name == "polynomial") {
      expr.check_keys({"p", "floor"});
      return LossFunction::polynomial(expr.require("p"), expr.get("floor", 0.1));
    }
    if (expr.name == "piecewise") {
      expr.check_keys({"pos", "neg"});
      return LossFunction::piecewise(expr.require("pos"), expr.require("neg"));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(0, e.what());
  }
  throw ConfigError(0, "unknown loss family '" + expr.name + "'");
}

}  // namespace srisk
