#include "strictlyap/lyapunov.hpp"

#include <cmath>

#include "strictlyap/error.hpp"

namespace strictlyap {

double LyapunovCandidate::vdot(const ControlSystem& sys, double t, std::span<const double> x,
                               std::span<const double> u) const {
  const Vec f = sys(t, x, u);
  const Vec g = grad_x(t, x);
  double acc = dv_dt(t, x);
  for (std::size_t i = 0; i < f.size(); ++i) acc += g[i] * f[i];
  return acc;
}

double LyapunovCandidate::gradient_norm(double t, std::span<const double> x) const {
  const double dt = dv_dt(t, x);
  const Vec g = grad_x(t, x);
  double acc = dt * dt;
  for (double c : g) acc += c * c;
  return std::sqrt(acc);
}

LyapunovCandidate LyapunovCandidate::from_expr(const expr::Expr& v, int n, GainFunction alpha1,
                                               GainFunction alpha2, GainFunction alpha3,
                                               std::optional<double> period) {
  if (v.max_index(expr::VarKind::State) > n) {
    throw Error(ErrorKind::DimensionMismatch, "V uses a state beyond n=" + std::to_string(n));
  }
  if (v.depends_on(expr::VarKind::Input) || v.depends_on(expr::VarKind::Arg)) {
    throw Error(ErrorKind::Config, "V may only use t and x");
  }
  auto eval_at = [](const expr::Expr& e, double t, std::span<const double> x) {
    expr::Bindings b;
    b.t = t;
    b.x = x;
    return e.eval(b);
  };
  Scalar value = [v, eval_at](double t, std::span<const double> x) { return eval_at(v, t, x); };
  Scalar dv_dt;
  Gradient grad;
  if (v.is_smooth()) {
    expr::Expr dt = v.differentiate(expr::Variable::time());
    std::vector<expr::Expr> dx;
    for (int i = 0; i < n; ++i) dx.push_back(v.differentiate(expr::Variable::state(i)));
    dv_dt = [dt, eval_at](double t, std::span<const double> x) { return eval_at(dt, t, x); };
    grad = [dx, eval_at](double t, std::span<const double> x) {
      Vec g(dx.size());
      for (std::size_t i = 0; i < dx.size(); ++i) g[i] = eval_at(dx[i], t, x);
      return g;
    };
  } else {
    dv_dt = [value](double t, std::span<const double> x) {
      const double h = fd_step(std::abs(t));
      return (value(t + h, x) - value(t - h, x)) / (2.0 * h);
    };
    grad = [value](double t, std::span<const double> x) {
      Vec g(x.size());
      Vec xp(x.begin(), x.end());
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double h = fd_step(std::abs(x[i]));
        xp[i] = x[i] + h;
        const double up = value(t, xp);
        xp[i] = x[i] - h;
        const double dn = value(t, xp);
        xp[i] = x[i];
        g[i] = (up - dn) / (2.0 * h);
      }
      return g;
    };
  }
  return LyapunovCandidate{std::move(value), std::move(dv_dt), std::move(grad), std::move(alpha1),
                           std::move(alpha2), std::move(alpha3), period, v.to_string()};
}

}  // namespace strictlyap
