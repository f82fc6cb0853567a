#pragma once

// Comparison functions: class-K-infinity gains and class-KL functions,
// their composition, numeric inversion and sampled membership checks.

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "strictlyap/expr.hpp"

namespace strictlyap {

inline constexpr double kDefaultProbeMax = 1e3;
inline constexpr std::size_t kDefaultKinfGrid = 10000;

/// Central difference step used when no analytic derivative is available.
inline double fd_step(double s) { return s > 1.0 ? 1e-6 * s : 1e-6; }

/// Candidate class-K-infinity function s -> g(s) on s >= 0.
///
/// The derivative is analytic when supplied; otherwise a central
/// difference with step max(1e-6, 1e-6 s), one-sided near 0.
class GainFunction {
 public:
  using Fn = std::function<double(double)>;

  GainFunction(Fn eval, Fn deriv, std::string label, double probe_max = kDefaultProbeMax);

  double operator()(double s) const { return eval_(s); }
  double derivative(double s) const;

  bool has_analytic_derivative() const { return static_cast<bool>(deriv_); }
  double probe_max() const { return probe_max_; }
  const std::string& label() const { return label_; }

  GainFunction with_probe_max(double probe_max) const;
  GainFunction with_label(std::string label) const;

  static GainFunction identity();
  static GainFunction linear(double slope);
  /// c * s^k, k >= 1.
  static GainFunction monomial(double c, double k);
  /// sum_i coeffs[i] * s^i.
  static GainFunction polynomial(std::vector<double> coeffs);
  /// Expression in the free variable `s`; symbolic derivative when smooth.
  static GainFunction from_expr(const expr::Expr& e, double probe_max = kDefaultProbeMax);
  static GainFunction parse(std::string_view text, double probe_max = kDefaultProbeMax);

 private:
  Fn eval_;
  Fn deriv_;
  std::string label_;
  double probe_max_;
};

/// Returns s with |g(s) - y| <= tol. The bracket starts at [0, 1] and is
/// doubled until g(hi) >= y; gives up with bracket-not-found once hi passes
/// probe_max * 2^max_doublings.
double invert(const GainFunction& g, double y, double tol = 1e-10, int max_doublings = 64);

/// g^{-1} as a gain; probe_max becomes g(probe_max).
GainFunction inverse(const GainFunction& g, double tol = 1e-10);

/// s -> outer(inner(s)), chain-rule derivative.
GainFunction compose(const GainFunction& outer, const GainFunction& inner);

GainFunction operator+(const GainFunction& a, const GainFunction& b);
GainFunction operator*(double c, const GainFunction& g);

struct KinfReport {
  bool pass = false;
  /// Smallest increment g(s_{i+1}) - g(s_i) seen (positive when monotone).
  double worst_violation = 0.0;
  double location = 0.0;
  std::string reason;
};

/// Falsification-style class-K-infinity spot check on [0, probe_max]:
/// g(0) ~ 0, strictly increasing between grid nodes, g'(s) >= -1e-9, and
/// g(probe_max) > g(0).
KinfReport check_kinf(const GainFunction& g, std::size_t n_grid = kDefaultKinfGrid);

/// Candidate class-KL function (s, t) -> beta(s, t).
class KLFunction {
 public:
  using Fn = std::function<double(double, double)>;

  KLFunction(Fn eval, std::string label) : eval_(std::move(eval)), label_(std::move(label)) {}

  double operator()(double s, double t) const { return eval_(s, t); }
  const std::string& label() const { return label_; }

 private:
  Fn eval_;
  std::string label_;
};

struct KLReport {
  bool pass = false;
  double worst_violation = 0.0;
  double s = 0.0;
  double t = 0.0;
  std::string reason;
};

/// Sampled KL check on [0, s_max] x [0, t_max]: beta(0, t) = 0, increasing
/// in s, non-increasing in t, and beta(s, t_big) < 1e-3 beta(s, 0).
KLReport check_kl(const KLFunction& beta, double s_max, double t_max, double t_big,
                  std::size_t n_s = 64, std::size_t n_t = 64);

/// beta_hat(s, t) = beta(s, pbar_fn(t)).
KLFunction rescale_kl(const KLFunction& beta, const GainFunction& pbar_fn);

}  // namespace strictlyap
