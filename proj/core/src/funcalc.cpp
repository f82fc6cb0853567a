#include "strictlyap/funcalc.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "strictlyap/error.hpp"

namespace strictlyap {

GainFunction::GainFunction(Fn eval, Fn deriv, std::string label, double probe_max)
    : eval_(std::move(eval)), deriv_(std::move(deriv)), label_(std::move(label)), probe_max_(probe_max) {}

double GainFunction::derivative(double s) const {
  if (deriv_) return deriv_(s);
  const double h = fd_step(s);
  if (s < h) {
    // second-order one-sided difference
    return (-3.0 * eval_(s) + 4.0 * eval_(s + h) - eval_(s + 2.0 * h)) / (2.0 * h);
  }
  return (eval_(s + h) - eval_(s - h)) / (2.0 * h);
}

GainFunction GainFunction::with_probe_max(double probe_max) const {
  GainFunction g = *this;
  g.probe_max_ = probe_max;
  return g;
}

GainFunction GainFunction::with_label(std::string label) const {
  GainFunction g = *this;
  g.label_ = std::move(label);
  return g;
}

GainFunction GainFunction::identity() {
  return GainFunction([](double s) { return s; }, [](double) { return 1.0; }, "s");
}

GainFunction GainFunction::linear(double slope) {
  return GainFunction([slope](double s) { return slope * s; }, [slope](double) { return slope; },
                      fmt::format("{}", slope) + "*s");
}

GainFunction GainFunction::monomial(double c, double k) {
  return GainFunction([c, k](double s) { return c * std::pow(s, k); },
                      [c, k](double s) { return c * k * std::pow(s, k - 1.0); },
                      fmt::format("{}", c) + "*s^" + fmt::format("{}", k));
}

GainFunction GainFunction::polynomial(std::vector<double> coeffs) {
  std::string label;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (coeffs[i] == 0.0) continue;
    if (!label.empty()) label += " + ";
    label += fmt::format("{}", coeffs[i]);
    if (i >= 1) label += "*s";
    if (i >= 2) label += "^" + fmt::format("{}", i);
  }
  auto eval = [coeffs](double s) {
    double acc = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * s + coeffs[i];
    return acc;
  };
  auto deriv = [coeffs](double s) {
    double acc = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 1;) acc = acc * s + static_cast<double>(i) * coeffs[i];
    return acc;
  };
  return GainFunction(eval, deriv, label.empty() ? "0" : label);
}

GainFunction GainFunction::from_expr(const expr::Expr& e, double probe_max) {
  Fn deriv;
  if (e.is_smooth()) {
    expr::Expr d = e.differentiate(expr::Variable::arg());
    deriv = [d](double s) {
      expr::Bindings b;
      b.s = s;
      return d.eval(b);
    };
  }
  auto eval = [e](double s) {
    expr::Bindings b;
    b.s = s;
    return e.eval(b);
  };
  return GainFunction(eval, deriv, e.to_string(), probe_max);
}

GainFunction GainFunction::parse(std::string_view text, double probe_max) {
  expr::Expr e = expr::parse(text);
  if (e.depends_on(expr::VarKind::Time) || e.depends_on(expr::VarKind::State) ||
      e.depends_on(expr::VarKind::Input)) {
    throw Error(ErrorKind::Config, "gain '" + std::string(text) + "' may only use the variable s");
  }
  return from_expr(e, probe_max);
}

double invert(const GainFunction& g, double y, double tol, int max_doublings) {
  if (y < 0.0) throw Error(ErrorKind::Domain, "invert: negative target " + fmt::format("{}", y));
  if (y == 0.0) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  const double cap = g.probe_max() * std::ldexp(1.0, max_doublings);
  while (g(hi) < y) {
    lo = hi;
    hi *= 2.0;
    if (hi > cap || !std::isfinite(hi)) {
      throw Error(ErrorKind::BracketNotFound,
                  "invert " + g.label() + " at y=" + fmt::format("{}", y) + ": g(" + fmt::format("{}", lo) +
                      ") < y");
    }
  }
  double best = hi;
  double best_err = std::abs(g(hi) - y);
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    const double err = std::abs(gm - y);
    if (err < best_err) {
      best = mid;
      best_err = err;
    }
    if (err <= tol || mid <= lo || mid >= hi) break;
    if (gm < y) lo = mid;
    else hi = mid;
  }
  return best;
}

GainFunction inverse(const GainFunction& g, double tol) {
  auto eval = [g, tol](double y) { return invert(g, y, tol); };
  auto deriv = [g, tol](double y) { return 1.0 / g.derivative(invert(g, y, tol)); };
  return GainFunction(eval, deriv, "inv(" + g.label() + ")", g(g.probe_max()));
}

GainFunction compose(const GainFunction& outer, const GainFunction& inner) {
  auto eval = [outer, inner](double s) { return outer(inner(s)); };
  auto deriv = [outer, inner](double s) { return outer.derivative(inner(s)) * inner.derivative(s); };
  return GainFunction(eval, deriv, outer.label() + " o " + inner.label(), inner.probe_max());
}

GainFunction operator+(const GainFunction& a, const GainFunction& b) {
  auto eval = [a, b](double s) { return a(s) + b(s); };
  auto deriv = [a, b](double s) { return a.derivative(s) + b.derivative(s); };
  return GainFunction(eval, deriv, "(" + a.label() + ") + (" + b.label() + ")",
                      std::min(a.probe_max(), b.probe_max()));
}

GainFunction operator*(double c, const GainFunction& g) {
  auto eval = [c, g](double s) { return c * g(s); };
  auto deriv = [c, g](double s) { return c * g.derivative(s); };
  return GainFunction(eval, deriv, fmt::format("{}", c) + "*(" + g.label() + ")", g.probe_max());
}

KinfReport check_kinf(const GainFunction& g, std::size_t n_grid) {
  KinfReport rep;
  if (n_grid < 2) n_grid = 2;
  const double top = g.probe_max();
  const double g0 = g(0.0);
  if (!(std::abs(g0) <= 1e-12)) {
    rep.reason = "g(0) = " + fmt::format("{}", g0);
    rep.worst_violation = -std::abs(g0);
    return rep;
  }
  rep.worst_violation = std::numeric_limits<double>::infinity();
  double prev = g0;
  double worst_slope = std::numeric_limits<double>::infinity();
  double worst_slope_at = 0.0;
  for (std::size_t i = 1; i < n_grid; ++i) {
    const double s = top * static_cast<double>(i) / static_cast<double>(n_grid - 1);
    const double v = g(s);
    if (!std::isfinite(v)) {
      rep.reason = "non-finite value at s=" + fmt::format("{}", s);
      rep.location = s;
      rep.worst_violation = -std::numeric_limits<double>::infinity();
      return rep;
    }
    const double inc = v - prev;
    if (inc < rep.worst_violation) {
      rep.worst_violation = inc;
      rep.location = s;
    }
    const double slope = g.derivative(s);
    if (slope < worst_slope) {
      worst_slope = slope;
      worst_slope_at = s;
    }
    prev = v;
  }
  if (rep.worst_violation <= 0.0) {
    rep.reason = "not strictly increasing near s=" + fmt::format("{}", rep.location);
    return rep;
  }
  if (worst_slope < -1e-9) {
    rep.reason = "negative slope " + fmt::format("{}", worst_slope) + " at s=" + fmt::format("{}", worst_slope_at);
    rep.location = worst_slope_at;
    return rep;
  }
  if (!(prev > g0)) {
    rep.reason = "g(probe_max) <= g(0)";
    return rep;
  }
  rep.pass = true;
  return rep;
}

KLReport check_kl(const KLFunction& beta, double s_max, double t_max, double t_big, std::size_t n_s,
                  std::size_t n_t) {
  KLReport rep;
  rep.worst_violation = std::numeric_limits<double>::infinity();
  auto note = [&rep](double v, double s, double t, const char* why) {
    if (v < rep.worst_violation) {
      rep.worst_violation = v;
      rep.s = s;
      rep.t = t;
      rep.reason = why;
    }
  };
  for (std::size_t j = 0; j < n_t; ++j) {
    const double t = t_max * static_cast<double>(j) / static_cast<double>(n_t - 1);
    note(-std::abs(beta(0.0, t)) + 1e-12, 0.0, t, "beta(0,t) != 0");
  }
  for (std::size_t i = 1; i < n_s; ++i) {
    const double s = s_max * static_cast<double>(i) / static_cast<double>(n_s - 1);
    const double s_prev = s_max * static_cast<double>(i - 1) / static_cast<double>(n_s - 1);
    for (std::size_t j = 0; j < n_t; ++j) {
      const double t = t_max * static_cast<double>(j) / static_cast<double>(n_t - 1);
      const double v = beta(s, t);
      const double below = beta(s_prev, t);
      // skip pairs that have both underflowed to 0
      if (v > 0.0 || below > 0.0) note(v - below, s, t, "not increasing in s");
      if (j > 0) {
        const double t_prev = t_max * static_cast<double>(j - 1) / static_cast<double>(n_t - 1);
        note(beta(s, t_prev) - v + 1e-12 * std::abs(v), s, t, "increasing in t");
      }
    }
    note(1e-3 * beta(s, 0.0) - beta(s, t_big), s, t_big, "no decay to 0 at t_big");
  }
  rep.pass = rep.worst_violation >= 0.0;
  if (rep.pass) rep.reason.clear();
  return rep;
}

KLFunction rescale_kl(const KLFunction& beta, const GainFunction& pbar_fn) {
  return KLFunction([beta, pbar_fn](double s, double t) { return beta(s, pbar_fn(t)); },
                    beta.label() + " rescaled by " + pbar_fn.label());
}

}  // namespace strictlyap
