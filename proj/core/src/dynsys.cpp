#include "strictlyap/dynsys.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "strictlyap/error.hpp"

namespace strictlyap {

double norm(std::span<const double> v) {
  double acc = 0.0;
  for (double c : v) acc += c * c;
  return std::sqrt(acc);
}

ControlSystem::ControlSystem(int n, int m, Field f, std::optional<double> period, std::string label)
    : n_(n), m_(m), f_(std::move(f)), period_(period), label_(std::move(label)) {
  if (n_ < 1 || m_ < 0) throw Error(ErrorKind::DimensionMismatch, "system needs n >= 1 and m >= 0");
}

ControlSystem ControlSystem::from_exprs(std::vector<expr::Expr> f, int m, std::optional<double> period) {
  const int n = static_cast<int>(f.size());
  std::string label;
  for (const auto& e : f) {
    if (e.max_index(expr::VarKind::State) > n) {
      throw Error(ErrorKind::DimensionMismatch, "'" + e.to_string() + "' uses a state beyond n=" + std::to_string(n));
    }
    if (e.max_index(expr::VarKind::Input) > m) {
      throw Error(ErrorKind::DimensionMismatch, "'" + e.to_string() + "' uses an input beyond m=" + std::to_string(m));
    }
    if (e.depends_on(expr::VarKind::Arg)) {
      throw Error(ErrorKind::Config, "vector field '" + e.to_string() + "' may not use s");
    }
    if (!label.empty()) label += "; ";
    label += e.to_string();
  }
  auto field = [f = std::move(f)](double t, std::span<const double> x, std::span<const double> u) {
    expr::Bindings b;
    b.t = t;
    b.x = x;
    b.u = u;
    Vec out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i].eval(b);
    return out;
  };
  return ControlSystem(n, m, field, period, label);
}

ControlSystem close_loop(const ControlSystem& sys, Feedback feedback, int k) {
  if (k < 0 || k > sys.m()) {
    throw Error(ErrorKind::DimensionMismatch,
                "feedback provides " + std::to_string(k) + " inputs but the system has " + std::to_string(sys.m()));
  }
  const int rest = sys.m() - k;
  auto field = [sys, feedback = std::move(feedback), k, rest](double t, std::span<const double> x,
                                                              std::span<const double> u) {
    Vec full = feedback(t, x);
    if (static_cast<int>(full.size()) != k) {
      throw Error(ErrorKind::DimensionMismatch, "feedback returned " + std::to_string(full.size()) +
                                                    " values, expected " + std::to_string(k));
    }
    if (static_cast<int>(u.size()) != rest) {
      throw Error(ErrorKind::DimensionMismatch, "closed loop expects " + std::to_string(rest) + " inputs");
    }
    full.insert(full.end(), u.begin(), u.end());
    return sys(t, x, full);
  };
  return ControlSystem(sys.n(), rest, field, sys.period(), sys.label() + " [closed loop]");
}

Feedback feedback_from_exprs(std::vector<expr::Expr> laws) {
  for (const auto& e : laws) {
    if (e.depends_on(expr::VarKind::Input) || e.depends_on(expr::VarKind::Arg)) {
      throw Error(ErrorKind::Config, "feedback law '" + e.to_string() + "' may only use t and x");
    }
  }
  return [laws = std::move(laws)](double t, std::span<const double> x) {
    expr::Bindings b;
    b.t = t;
    b.x = x;
    Vec out(laws.size());
    for (std::size_t i = 0; i < laws.size(); ++i) out[i] = laws[i].eval(b);
    return out;
  };
}

Signal::Signal(int m, std::vector<Piece> pieces, std::optional<double> sup_bound)
    : m_(m), pieces_(std::move(pieces)), sup_bound_(sup_bound) {
  for (const auto& p : pieces_) {
    if (static_cast<int>(p.components.size()) != m_) {
      throw Error(ErrorKind::DimensionMismatch, "signal piece has " + std::to_string(p.components.size()) +
                                                    " components, expected " + std::to_string(m_));
    }
    for (const auto& e : p.components) {
      if (e.depends_on(expr::VarKind::State) || e.depends_on(expr::VarKind::Input) ||
          e.depends_on(expr::VarKind::Arg)) {
        throw Error(ErrorKind::Config, "signal '" + e.to_string() + "' may only use t");
      }
    }
  }
}

Signal Signal::zero(int m) {
  return Signal(m, {Piece{std::numeric_limits<double>::infinity(), std::vector<expr::Expr>(m)}}, 0.0);
}

Signal Signal::from_exprs(int m, std::vector<std::vector<expr::Expr>> pieces, std::vector<double> breaks,
                          std::optional<double> sup_bound) {
  if (pieces.empty()) throw Error(ErrorKind::Config, "signal needs at least one piece");
  if (breaks.size() + 1 != pieces.size()) {
    throw Error(ErrorKind::Config, "signal with " + std::to_string(pieces.size()) + " pieces needs " +
                                       std::to_string(pieces.size() - 1) + " breakpoints");
  }
  for (std::size_t i = 1; i < breaks.size(); ++i) {
    if (!(breaks[i] > breaks[i - 1])) throw Error(ErrorKind::Config, "signal breakpoints must increase");
  }
  std::vector<Piece> out;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const double until = i < breaks.size() ? breaks[i] : std::numeric_limits<double>::infinity();
    out.push_back(Piece{until, std::move(pieces[i])});
  }
  return Signal(m, std::move(out), sup_bound);
}

Vec Signal::operator()(double t) const {
  const Piece* active = &pieces_.back();
  for (const auto& p : pieces_) {
    if (t < p.until) {
      active = &p;
      break;
    }
  }
  expr::Bindings b;
  b.t = t;
  Vec out(m_);
  for (int i = 0; i < m_; ++i) out[i] = active->components[i].eval(b);
  return out;
}

bool Signal::is_zero() const {
  for (const auto& p : pieces_) {
    for (const auto& e : p.components) {
      auto c = e.constant_value();
      if (!c || *c != 0.0) return false;
    }
  }
  return true;
}

std::string Signal::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    if (i) out += fmt::format(" |{}| ", pieces_[i - 1].until);
    for (int j = 0; j < m_; ++j) {
      if (j) out += ", ";
      out += pieces_[i].components[j].to_string();
    }
  }
  return out;
}

namespace {

void axpy(Vec& out, std::span<const double> x, double a, const Vec& k) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + a * k[i];
}

}  // namespace

Trajectory integrate(const ControlSystem& sys, std::span<const double> x0, double t0, double tf, const Signal& u,
                     double step, double guard) {
  if (!(tf > t0)) throw Error(ErrorKind::Config, "integrate: tf must exceed t0");
  if (!(step > 0.0)) throw Error(ErrorKind::Config, "integrate: step must be positive");
  if (static_cast<int>(x0.size()) != sys.n()) {
    throw Error(ErrorKind::DimensionMismatch, "initial state has " + std::to_string(x0.size()) +
                                                  " components, system has n=" + std::to_string(sys.n()));
  }
  if (u.m() != sys.m()) {
    throw Error(ErrorKind::DimensionMismatch, "signal has " + std::to_string(u.m()) +
                                                  " components, system has m=" + std::to_string(sys.m()));
  }
  Trajectory traj;
  traj.input_used = u;
  const double span_t = tf - t0;
  std::size_t n_steps = static_cast<std::size_t>(std::ceil(span_t / step - 1e-9));
  if (n_steps == 0) n_steps = 1;
  traj.times.reserve(n_steps + 1);
  traj.states.reserve(n_steps + 1);
  traj.inputs.reserve(n_steps + 1);

  Vec x(x0.begin(), x0.end());
  Vec tmp(x.size());
  double t = t0;
  traj.times.push_back(t);
  traj.states.push_back(x);
  traj.inputs.push_back(u(t));
  for (std::size_t k = 1; k <= n_steps; ++k) {
    const double t_next = k == n_steps ? tf : t0 + step * static_cast<double>(k);
    const double h = t_next - t;
    const Vec u0 = traj.inputs.back();
    const Vec umid = u(t + 0.5 * h);
    const Vec u1 = u(t_next);
    const Vec k1 = sys(t, x, u0);
    axpy(tmp, x, 0.5 * h, k1);
    const Vec k2 = sys(t + 0.5 * h, tmp, umid);
    axpy(tmp, x, 0.5 * h, k2);
    const Vec k3 = sys(t + 0.5 * h, tmp, umid);
    axpy(tmp, x, h, k3);
    const Vec k4 = sys(t_next, tmp, u1);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    t = t_next;
    const double nx = norm(x);
    if (!std::isfinite(nx) || nx > guard) {
      throw Error(ErrorKind::BlowUp, fmt::format("|x| = {} exceeds {} at t = {}", nx, guard, t));
    }
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.inputs.push_back(u1);
  }
  return traj;
}

LyapunovSeries lyapunov_along(const Trajectory& traj,
                              const std::function<double(double, std::span<const double>)>& w) {
  LyapunovSeries out;
  const std::size_t n = traj.times.size();
  out.t = traj.times;
  out.value.resize(n);
  out.dvalue_fd.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) out.value[k] = w(traj.times[k], traj.states[k]);
  if (n < 2) return out;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t a = k == 0 ? 0 : k - 1;
    const std::size_t b = k + 1 == n ? k : k + 1;
    out.dvalue_fd[k] = (out.value[b] - out.value[a]) / (traj.times[b] - traj.times[a]);
  }
  return out;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj,
                          const std::vector<std::pair<std::string, std::vector<double>>>& extra) {
  const std::size_t n = traj.states.empty() ? 0 : traj.states.front().size();
  const std::size_t m = traj.inputs.empty() ? 0 : traj.inputs.front().size();
  out << "t";
  for (std::size_t i = 1; i <= n; ++i) out << ",x" << i;
  for (std::size_t i = 1; i <= m; ++i) out << ",u" << i;
  for (const auto& col : extra) out << ',' << col.first;
  out << '\n';
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    fmt::print(out, "{}", traj.times[k]);
    for (double v : traj.states[k]) fmt::print(out, ",{}", v);
    for (double v : traj.inputs[k]) fmt::print(out, ",{}", v);
    for (const auto& col : extra) fmt::print(out, ",{}", col.second[k]);
    out << '\n';
  }
}

}  // namespace strictlyap
