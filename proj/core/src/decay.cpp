#include "strictlyap/decay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "strictlyap/error.hpp"
#include "strictlyap/quadrature.hpp"

namespace strictlyap {

DecayRate::DecayRate(Fn p, std::string label, std::optional<double> period, std::optional<Extension> extension)
    : p_(std::move(p)), label_(std::move(label)), period_(period) {
  if (period_ && !(*period_ > 0.0)) throw Error(ErrorKind::Config, "decay rate period must be positive");
  extension_ = extension.value_or(period_ ? Extension::Periodic : Extension::Natural);
  if (extension_ == Extension::Periodic && !period_) {
    throw Error(ErrorKind::Config, "periodic extension requires a period");
  }
}

double DecayRate::operator()(double t) const {
  if (t >= 0.0) return p_(t);
  switch (extension_) {
    case Extension::Natural: return p_(t);
    case Extension::Hold: return p_(0.0);
    case Extension::Periodic: {
      double r = std::fmod(t, *period_);
      if (r < 0.0) r += *period_;
      return p_(r);
    }
  }
  return p_(t);
}

DecayRate DecayRate::constant(double c) {
  return DecayRate([c](double) { return c; }, fmt::format("{}", c));
}

DecayRate DecayRate::parse(std::string_view text, std::optional<double> period,
                           std::optional<Extension> extension) {
  expr::Expr e = expr::parse(text);
  if (e.depends_on(expr::VarKind::Arg) || e.depends_on(expr::VarKind::State) ||
      e.depends_on(expr::VarKind::Input)) {
    throw Error(ErrorKind::Config, "decay rate '" + std::string(text) + "' may only use the variable t");
  }
  auto fn = [e](double t) {
    expr::Bindings b;
    b.t = t;
    return e.eval(b);
  };
  return DecayRate(fn, e.to_string(), period, extension);
}

namespace {

double checked(const DecayRate& p, double t) {
  const double v = p(t);
  if (!std::isfinite(v)) {
    throw Error(ErrorKind::Domain, "decay rate " + p.label() + " is not finite at t=" + fmt::format("{}", t));
  }
  return v;
}

double integrate_plain(const DecayRate& p, double a, double b, const QuadratureRule& rule) {
  const std::size_t n = simpson_subintervals(b - a, rule.min_subintervals, rule.max_step);
  return simpson([&p](double r) { return checked(p, r); }, a, b, n);
}

// int_a^b p with whole periods of a periodic rate folded into one cached
// period integral.
class FoldedIntegral {
 public:
  FoldedIntegral(const DecayRate& p, const QuadratureRule& rule) : p_(p), rule_(rule) {
    if (p_.period()) full_ = integrate_plain(p_, 0.0, *p_.period(), rule_);
  }

  double operator()(double a, double b) const {
    if (full_ && b > a) {
      const double k = std::floor((b - a) / *p_.period());
      if (k >= 1.0) return k * *full_ + integrate_plain(p_, a, b - k * *p_.period(), rule_);
    }
    return integrate_plain(p_, a, b, rule_);
  }

 private:
  const DecayRate& p_;
  QuadratureRule rule_;
  std::optional<double> full_;
};

double integrate(const DecayRate& p, double a, double b, const QuadratureRule& rule) {
  return FoldedIntegral(p, rule)(a, b);
}

// Small steps inside a sliding sweep only need the step-size criterion.
double integrate_step(const DecayRate& p, double a, double b, const QuadratureRule& rule) {
  const std::size_t n = simpson_subintervals(b - a, 2, rule.max_step);
  return simpson([&p](double r) { return checked(p, r); }, a, b, n);
}

struct Extremum {
  double t = 0.0;
  double value = 0.0;
};

// Minimum over t in [t0, t1] of F(t) = int_{t+lo}^{t+hi} p. A sliding
// sweep over a coarse grid picks candidates which are then refined by
// golden-section search on the exact window integral.
Extremum minimize_window(const DecayRate& p, double lo, double hi, double t0, double t1, std::size_t n_grid,
                         const QuadratureRule& rule) {
  const FoldedIntegral window(p, rule);
  auto exact = [&](double t) { return window(t + lo, t + hi); };
  if (!(t1 > t0) || n_grid < 2) return {t0, exact(t0)};

  const double dt = (t1 - t0) / static_cast<double>(n_grid - 1);
  std::vector<double> f(n_grid);
  f[0] = exact(t0);
  for (std::size_t i = 1; i < n_grid; ++i) {
    const double a = t0 + dt * static_cast<double>(i - 1);
    const double b = t0 + dt * static_cast<double>(i);
    f[i] = f[i - 1] + integrate_step(p, a + hi, b + hi, rule) - integrate_step(p, a + lo, b + lo, rule);
  }

  std::vector<std::size_t> order(n_grid);
  for (std::size_t i = 0; i < n_grid; ++i) order[i] = i;
  const std::size_t n_cand = std::min<std::size_t>(3, n_grid);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_cand), order.end(),
                    [&f](std::size_t a, std::size_t b) { return f[a] < f[b]; });

  Extremum best{t0, exact(t0)};
  auto consider = [&best](double t, double v) {
    if (v < best.value) best = {t, v};
  };
  consider(t1, exact(t1));
  for (std::size_t c = 0; c < n_cand; ++c) {
    const std::size_t i = order[c];
    const double ti = t0 + dt * static_cast<double>(i);
    const double a = std::max(t0, ti - dt);
    const double b = std::min(t1, ti + dt);
    consider(ti, exact(ti));
    const double tm = golden_minimize(exact, a, b, 40);
    consider(tm, exact(tm));
  }
  return best;
}

Extremum maximize_rate(const DecayRate& p, double t0, double t1, const QuadratureRule& rule) {
  const std::size_t n = simpson_subintervals(t1 - t0, 2, rule.max_step);
  const double dt = (t1 - t0) / static_cast<double>(n);
  Extremum best{t0, checked(p, t0)};
  std::size_t best_i = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double t = t0 + dt * static_cast<double>(i);
    const double v = checked(p, t);
    if (v > best.value) {
      best = {t, v};
      best_i = i;
    }
  }
  const double a = t0 + dt * static_cast<double>(best_i == 0 ? 0 : best_i - 1);
  const double b = std::min(t1, t0 + dt * static_cast<double>(best_i + 1));
  const double tm = golden_minimize([&p](double t) { return -checked(p, t); }, a, b, 60);
  const double vm = checked(p, tm);
  if (vm > best.value) best = {tm, vm};
  return best;
}

}  // namespace

double window_integral(const DecayRate& p, double a, double b, const QuadratureRule& rule) {
  return integrate(p, a, b, rule);
}

PeEstimate estimate_pe(const DecayRate& p, double tau, std::optional<double> horizon, std::size_t n_grid,
                       const QuadratureRule& rule) {
  if (!(tau > 0.0)) throw Error(ErrorKind::Config, "tau must be positive");
  PeEstimate est;
  est.tau = tau;
  est.horizon = horizon.value_or(p.period() ? *p.period() + tau : 10.0 * tau);
  if (est.horizon < tau) throw Error(ErrorKind::Config, "horizon must be at least tau");
  est.horizon_limited = !p.period().has_value();

  const Extremum lo = minimize_window(p, -tau, 0.0, 0.0, est.horizon, n_grid, rule);
  est.epsilon = lo.value;
  est.argmin_t = lo.t;
  const Extremum hi = maximize_rate(p, -tau, est.horizon, rule);
  est.pbar = hi.value;
  est.argmax_t = hi.t;

  if (!(est.epsilon > 1e-9)) {
    throw Error(ErrorKind::NotPersistentlyExciting,
                p.label() + ": min window integral " + fmt::format("{}", est.epsilon) + " at t=" +
                    fmt::format("{}", lo.t) + " for tau=" + fmt::format("{}", tau));
  }
  est.epsilon_certified = (1.0 - kPeSafetyMargin) * est.epsilon;
  est.pbar_certified = (1.0 + kPeSafetyMargin) * est.pbar;
  return est;
}

std::vector<std::pair<double, double>> scan_tau(const DecayRate& p, std::span<const double> taus,
                                                std::optional<double> horizon, std::size_t n_grid) {
  std::vector<std::pair<double, double>> out;
  out.reserve(taus.size());
  for (double tau : taus) {
    double eps = 0.0;
    try {
      eps = estimate_pe(p, tau, horizon, n_grid).epsilon;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NotPersistentlyExciting) throw;
    }
    out.emplace_back(tau, eps);
  }
  return out;
}

namespace {

struct XiWindow {
  double xi;
  double window;
};

XiWindow xi_and_window(const DecayRate& p, double tau, double t, const QuadratureRule& rule) {
  const double a = t - tau;
  std::size_t n = simpson_subintervals(tau, rule.min_subintervals, rule.max_step);
  const double h = tau / static_cast<double>(n);
  double xi_sum = 0.0;
  double w_sum = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double r = a + h * static_cast<double>(i);
    const double weight = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double v = checked(p, r);
    w_sum += weight * v;
    xi_sum += weight * v * (r - a);
  }
  return {h / 3.0 * xi_sum, h / 3.0 * w_sum};
}

}  // namespace

double xi(const DecayRate& p, double tau, double t, const QuadratureRule& rule) {
  if (!(tau > 0.0)) throw Error(ErrorKind::Config, "tau must be positive");
  return xi_and_window(p, tau, t, rule).xi;
}

double underline_p(const DecayRate& p, double h, double horizon, std::size_t n_grid, const QuadratureRule& rule) {
  if (h < 0.0) throw Error(ErrorKind::Domain, "underline_p: negative window length");
  if (h == 0.0) return 0.0;
  return minimize_window(p, 0.0, h, 0.0, horizon, n_grid, rule).value;
}

GainFunction underline_p_function(const DecayRate& p, double horizon, std::size_t n_grid) {
  return GainFunction([p, horizon, n_grid](double h) { return underline_p(p, h, horizon, n_grid); }, nullptr,
                      "inf_t int_t^{t+h} " + p.label());
}

XiFunction::XiFunction(DecayRate p, double tau, const QuadratureRule& rule, std::size_t table_nodes)
    : p_(std::move(p)), tau_(tau), rule_(rule) {
  if (!(tau_ > 0.0)) throw Error(ErrorKind::Config, "tau must be positive");
  if (!p_.period() || table_nodes < 2) return;
  period_ = *p_.period();
  step_ = period_ / static_cast<double>(table_nodes);
  nodes_.resize(table_nodes + 1);
  for (std::size_t i = 0; i < table_nodes; ++i) {
    const double t = step_ * static_cast<double>(i);
    const XiWindow xw = xi_and_window(p_, tau_, t, rule_);
    const double pt = checked(p_, t);
    nodes_[i] = {xw.xi, tau_ * pt - xw.window, xw.window, pt - checked(p_, t - tau_)};
  }
  nodes_[table_nodes] = nodes_[0];
}

double XiFunction::wrap(double t) const {
  double r = std::fmod(t, period_);
  if (r < 0.0) r += period_;
  return r;
}

double XiFunction::hermite(double t, double Node::*val, double Node::*der) const {
  const double r = wrap(t);
  std::size_t i = static_cast<std::size_t>(r / step_);
  if (i >= nodes_.size() - 1) i = nodes_.size() - 2;
  const double th = (r - step_ * static_cast<double>(i)) / step_;
  const double th2 = th * th;
  const double th3 = th2 * th;
  const Node& a = nodes_[i];
  const Node& b = nodes_[i + 1];
  return (2 * th3 - 3 * th2 + 1) * (a.*val) + (th3 - 2 * th2 + th) * step_ * (a.*der) +
         (-2 * th3 + 3 * th2) * (b.*val) + (th3 - th2) * step_ * (b.*der);
}

double XiFunction::value(double t) const {
  if (tabulated()) return hermite(t, &Node::xi, &Node::dxi);
  return xi_and_window(p_, tau_, t, rule_).xi;
}

double XiFunction::window(double t) const {
  if (tabulated()) return hermite(t, &Node::w, &Node::dw);
  return integrate(p_, t - tau_, t, rule_);
}

double XiFunction::rate(double t) const { return tau_ * checked(p_, t) - window(t); }

}  // namespace strictlyap
