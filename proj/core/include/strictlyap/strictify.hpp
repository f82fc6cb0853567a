#pragma once

// Strictification of non-strict Lyapunov functions:
//   V#(t, x) = V(t, x) + xi(t) w(V(t, x)),
// where xi is the double integral of a persistently exciting rate p and
// w is a slope-limited gain.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "strictlyap/decay.hpp"
#include "strictlyap/dynsys.hpp"
#include "strictlyap/funcalc.hpp"
#include "strictlyap/lyapunov.hpp"
#include "strictlyap/verify.hpp"

namespace strictlyap {

/// s -> max{tau pbar / 2, 1} (alpha2(s) + mu(s) + s).
GainFunction build_alpha2_tilde(const GainFunction& alpha2, const GainFunction& mu, double tau, double pbar);

inline constexpr double kStepFactor = 0.25;
inline constexpr double kExampleFactor = 0.125;

/// w = (factor / tau) mu_tilde. Throws slope-bound-violated unless
/// 0 <= w'(s) <= 1 / (2 tau^2 pbar) on a grid over [0, probe_max].
GainFunction build_w(const GainFunction& mu_tilde, double tau, double pbar, double factor);

/// mu^{-1} o (2 Omega).
GainFunction dis_to_issp_chi(const GainFunction& mu, const GainFunction& omega);

enum class CertificateKind { StrictIss, StrictDis };

std::string to_string(CertificateKind kind);

struct StrictCertificate {
  CertificateKind kind;
  LyapunovCandidate base;
  ControlSystem system;
  XiFunction xi;
  /// Certified constants used by the construction.
  PeTriple pe;
  double factor;
  GainFunction w;
  std::optional<GainFunction> alpha2_tilde;
  /// Guaranteed decay s -> eps w(alpha1(s)).
  GainFunction decay;
  double gain_margin;
  /// Input gains of the contract: chi for strict-ISS, Omega for strict-DIS.
  std::optional<GainFunction> chi;
  std::optional<GainFunction> omega;
  /// For strict-DIS: the strict ISS gain mu^{-1}(2 (5/4) Omega) w.r.t.
  /// decay, and the halved decay that comes with it.
  std::optional<GainFunction> iss_chi;
  std::optional<GainFunction> iss_decay;
  SamplingDomain domain;
  std::vector<InequalityReport> validation;

  double v_sharp(double t, std::span<const double> x) const;
  /// 1 + xi(t) w'(V(t, x)).
  double scale(double t, std::span<const double> x) const;
  /// [1 + xi w'(V)] Vdot + [tau p(t) - int_{t-tau}^t p] w(V).
  double vdot_sharp(double t, std::span<const double> x, std::span<const double> u) const;
  /// V# with its own partial derivatives and UPPD envelopes.
  LyapunovCandidate as_candidate() const;
  bool valid() const;
};

/// Default validation box: t in [0, max(period, tau) + tau], |x| <= 10,
/// |u| <= 5.
SamplingDomain default_domain(const ControlSystem& sys, const DecayRate& p, double tau);

/// Non-strict ISS(p) premise -> strict ISS certificate (w through
/// alpha2_tilde, factor 1/4).
StrictCertificate strictify_issp(const LyapunovCandidate& v, const ControlSystem& sys, const DecayRate& p,
                                 const PeEstimate& pe, const GainFunction& chi, const GainFunction& mu,
                                 const SamplingDomain& domain, const CheckOptions& opts = {});

/// Value-form DIS(p) premise Vdot <= -p mu_tilde(V) + Omega(|u|) -> strict
/// DIS certificate with w = (factor / tau) mu_tilde.
StrictCertificate strictify_disp(const LyapunovCandidate& v, const ControlSystem& sys, const DecayRate& p,
                                 const PeEstimate& pe, const GainFunction& mu_tilde, const GainFunction& omega,
                                 double factor, const SamplingDomain& domain, const CheckOptions& opts = {});

/// State-form DIS(p) premise Vdot <= -p mu(|x|) + Omega(|u|); uses
/// mu_tilde = mu o alpha2_tilde^{-1} and factor 1/4.
StrictCertificate strictify_disp_state(const LyapunovCandidate& v, const ControlSystem& sys, const DecayRate& p,
                                       const PeEstimate& pe, const GainFunction& mu, const GainFunction& omega,
                                       const SamplingDomain& domain, const CheckOptions& opts = {});

struct OmegaOptions {
  double t_max = 10.0;
  double s_min = 1e-3;
  double s_max = 5.0;
  std::size_t n_grid = 64;
  std::size_t samples_per_s = 2000;
  std::uint64_t seed = 1;
};

struct OmegaEnvelope {
  GainFunction omega;
  std::vector<double> s_grid;
  /// Sampled M(s) = max{Vdot + mu(|x|) : t in [0, t_max], |x| <= chi(s), |u| <= s}.
  std::vector<double> sup;
};

/// Monotone piecewise-linear majorant of M(s) + s. The sup is re-taken on
/// [0, 2 t_max] and [0, 4 t_max]; throws unbounded-sup when it keeps
/// growing at least linearly with the horizon.
OmegaEnvelope construct_omega(const ControlSystem& sys, const LyapunovCandidate& v, const GainFunction& mu,
                              const GainFunction& chi, const OmegaOptions& opts = {});

}  // namespace strictlyap
