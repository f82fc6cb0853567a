#pragma once

// Decay rates p >= 0 and their persistency-of-excitation analysis: the
// sliding-window integral, the double integral xi(t) and the infimum
// function p_underline(h).

#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "strictlyap/funcalc.hpp"

namespace strictlyap {

/// How p is evaluated for t < 0.
enum class Extension {
  Natural,   // evaluate the underlying function as is
  Hold,      // p(t) = p(0)
  Periodic,  // p(t) = p(t mod period)
};

/// Constants (tau, epsilon, pbar) with int_{t-tau}^t p >= epsilon and
/// p <= pbar for all t >= 0.
struct PeTriple {
  double tau = 0.0;
  double epsilon = 0.0;
  double pbar = 0.0;
};

class DecayRate {
 public:
  using Fn = std::function<double(double)>;

  /// Extension defaults to Periodic when a period is given, else Natural.
  DecayRate(Fn p, std::string label, std::optional<double> period = std::nullopt,
            std::optional<Extension> extension = std::nullopt);

  double operator()(double t) const;

  const std::string& label() const { return label_; }
  std::optional<double> period() const { return period_; }
  Extension extension() const { return extension_; }

  static DecayRate constant(double c);
  static DecayRate parse(std::string_view text, std::optional<double> period = std::nullopt,
                         std::optional<Extension> extension = std::nullopt);

 private:
  Fn p_;
  std::string label_;
  std::optional<double> period_;
  Extension extension_;
};

struct QuadratureRule {
  std::size_t min_subintervals = 2048;
  double max_step = std::numbers::pi / 2048.0;
};

inline constexpr double kPeSafetyMargin = 0.01;

struct PeEstimate {
  double tau = 0.0;
  /// Raw sampled minimum of the window integral and maximum of p.
  double epsilon = 0.0;
  double pbar = 0.0;
  /// Raw values shrunk / inflated by kPeSafetyMargin.
  double epsilon_certified = 0.0;
  double pbar_certified = 0.0;
  double horizon = 0.0;
  double argmin_t = 0.0;
  double argmax_t = 0.0;
  /// Set for aperiodic rates: the bounds only hold on the sampled horizon.
  bool horizon_limited = false;

  PeTriple raw() const { return {tau, epsilon, pbar}; }
  PeTriple certified() const { return {tau, epsilon_certified, pbar_certified}; }
};

/// int_a^b p by composite Simpson under `rule`. Throws domain-error when p
/// is not finite on [a, b].
double window_integral(const DecayRate& p, double a, double b, const QuadratureRule& rule = {});

/// Estimates (epsilon, pbar) for a given tau: epsilon is the minimum over
/// t in [0, horizon] of int_{t-tau}^t p, pbar the maximum of p over
/// [-tau, horizon]. Horizon defaults to period + tau (periodic) or 10 tau.
/// Throws not-persistently-exciting when epsilon <= 1e-9.
PeEstimate estimate_pe(const DecayRate& p, double tau, std::optional<double> horizon = std::nullopt,
                       std::size_t n_grid = 1024, const QuadratureRule& rule = {});

/// epsilon(tau) over a tau grid; non-PE entries report epsilon = 0.
std::vector<std::pair<double, double>> scan_tau(const DecayRate& p, std::span<const double> taus,
                                                std::optional<double> horizon = std::nullopt,
                                                std::size_t n_grid = 512);

/// xi(t) = int_{t-tau}^t int_s^t p(r) dr ds, evaluated through the
/// equivalent single integral int_{t-tau}^t (r - t + tau) p(r) dr.
double xi(const DecayRate& p, double tau, double t, const QuadratureRule& rule = {});

/// inf over t in [0, horizon] of int_t^{t+h} p.
double underline_p(const DecayRate& p, double h, double horizon, std::size_t n_grid = 512,
                   const QuadratureRule& rule = {});

/// h -> underline_p(p, h, horizon) as a gain.
GainFunction underline_p_function(const DecayRate& p, double horizon, std::size_t n_grid = 256);

/// xi(t), its derivative tau p(t) - W(t) and W(t) = int_{t-tau}^t p.
/// Periodic rates are tabulated over one period and cubic-Hermite
/// interpolated with exact slopes; otherwise every call integrates.
class XiFunction {
 public:
  XiFunction(DecayRate p, double tau, const QuadratureRule& rule = {}, std::size_t table_nodes = 1024);

  double value(double t) const;
  double rate(double t) const;
  double window(double t) const;

  double tau() const { return tau_; }
  const DecayRate& rate_function() const { return p_; }
  bool tabulated() const { return !nodes_.empty(); }

 private:
  struct Node {
    double xi;
    double dxi;
    double w;
    double dw;
  };
  double wrap(double t) const;
  double hermite(double t, double Node::*val, double Node::*der) const;

  DecayRate p_;
  double tau_;
  QuadratureRule rule_;
  double period_ = 0.0;
  double step_ = 0.0;
  std::vector<Node> nodes_;
};

}  // namespace strictlyap
