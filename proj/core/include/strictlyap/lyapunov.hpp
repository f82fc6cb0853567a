#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>

#include "strictlyap/dynsys.hpp"
#include "strictlyap/expr.hpp"
#include "strictlyap/funcalc.hpp"

namespace strictlyap {

/// V(t, x) with its partial derivatives and the envelopes
/// alpha1(|x|) <= V <= alpha2(|x|), |grad_{t,x} V| <= alpha3(|x|).
struct LyapunovCandidate {
  using Scalar = std::function<double(double, std::span<const double>)>;
  using Gradient = std::function<Vec(double, std::span<const double>)>;

  Scalar value;
  Scalar dv_dt;
  Gradient grad_x;
  GainFunction alpha1;
  GainFunction alpha2;
  GainFunction alpha3;
  std::optional<double> period;
  std::string label;

  double operator()(double t, std::span<const double> x) const { return value(t, x); }

  /// Vdot = dV/dt + grad_x V . f(t, x, u)
  double vdot(const ControlSystem& sys, double t, std::span<const double> x, std::span<const double> u) const;

  /// Full (t, x) gradient norm.
  double gradient_norm(double t, std::span<const double> x) const;

  /// V given as an expression over t, x1..xn. Partial derivatives are
  /// symbolic, or central differences when V uses abs/max/min.
  static LyapunovCandidate from_expr(const expr::Expr& v, int n, GainFunction alpha1, GainFunction alpha2,
                                     GainFunction alpha3, std::optional<double> period = std::nullopt);
};

}  // namespace strictlyap
