#pragma once

// Control systems xdot = f(t, x, u), feedback closure, disturbance signals
// and fixed-step RK4 integration.

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "strictlyap/expr.hpp"

namespace strictlyap {

using Vec = std::vector<double>;

double norm(std::span<const double> v);

class ControlSystem {
 public:
  using Field = std::function<Vec(double, std::span<const double>, std::span<const double>)>;

  ControlSystem(int n, int m, Field f, std::optional<double> period = std::nullopt, std::string label = "");

  Vec operator()(double t, std::span<const double> x, std::span<const double> u) const { return f_(t, x, u); }

  int n() const { return n_; }
  int m() const { return m_; }
  std::optional<double> period() const { return period_; }
  const std::string& label() const { return label_; }

  /// One expression per state component over t, x1..xn, u1..um.
  static ControlSystem from_exprs(std::vector<expr::Expr> f, int m, std::optional<double> period = std::nullopt);

 private:
  int n_;
  int m_;
  Field f_;
  std::optional<double> period_;
  std::string label_;
};

using Feedback = std::function<Vec(double, std::span<const double>)>;

/// Feeds the first `k` inputs from `feedback`; the closed loop keeps the
/// remaining m - k inputs: f_cl(t, x, u) = f(t, x, (feedback(t, x), u)).
ControlSystem close_loop(const ControlSystem& sys, Feedback feedback, int k);

/// Feedback from k expressions over t, x1..xn.
Feedback feedback_from_exprs(std::vector<expr::Expr> laws);

/// Piecewise disturbance signal. Piece i is active on [break_{i-1}, break_i).
class Signal {
 public:
  struct Piece {
    double until;  // +inf for the last piece
    std::vector<expr::Expr> components;
  };

  Signal(int m, std::vector<Piece> pieces, std::optional<double> sup_bound = std::nullopt);

  static Signal zero(int m);
  /// Each entry lists m expressions over t; `breaks` has pieces.size() - 1
  /// strictly increasing times.
  static Signal from_exprs(int m, std::vector<std::vector<expr::Expr>> pieces, std::vector<double> breaks = {},
                           std::optional<double> sup_bound = std::nullopt);

  Vec operator()(double t) const;
  int m() const { return m_; }
  std::optional<double> sup_bound() const { return sup_bound_; }
  /// True when every component of every piece is the literal 0.
  bool is_zero() const;
  std::string to_string() const;

 private:
  int m_;
  std::vector<Piece> pieces_;
  std::optional<double> sup_bound_;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<Vec> inputs;
  Signal input_used = Signal::zero(0);
};

inline constexpr double kDefaultStep = 1e-3;
inline constexpr double kBlowUpGuard = 1e8;

/// Classical RK4 with a fixed step; the last step is shortened to land on
/// tf. Throws blow-up when |x| exceeds `guard`.
Trajectory integrate(const ControlSystem& sys, std::span<const double> x0, double t0, double tf, const Signal& u,
                     double step = kDefaultStep, double guard = kBlowUpGuard);

struct LyapunovSeries {
  std::vector<double> t;
  std::vector<double> value;
  std::vector<double> dvalue_fd;
};

/// W(t, x(t)) along a trajectory with its finite-difference time derivative
/// (central inside, one-sided at the ends).
LyapunovSeries lyapunov_along(const Trajectory& traj,
                              const std::function<double(double, std::span<const double>)>& w);

/// CSV header `t,x1..xn,u1..um` followed by any extra named columns.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj,
                          const std::vector<std::pair<std::string, std::vector<double>>>& extra = {});

}  // namespace strictlyap
