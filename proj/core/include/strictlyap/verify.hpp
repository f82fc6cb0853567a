#pragma once

// Sampling-based checks of the Lyapunov inequalities. A "pass" means no
// violation beyond `tol` was found on the reported domain with the
// reported seed; it is evidence, not a proof.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "strictlyap/decay.hpp"
#include "strictlyap/dynsys.hpp"
#include "strictlyap/funcalc.hpp"
#include "strictlyap/lyapunov.hpp"

namespace strictlyap {

/// Box in t and balls |x| <= x_max, |u| <= u_max.
struct SamplingDomain {
  int n = 1;
  int m = 0;
  double t_min = 0.0;
  double t_max = 10.0;
  double x_max = 10.0;
  double u_max = 5.0;

  std::string to_string() const;
};

struct Sample {
  double t = 0.0;
  Vec x;
  Vec u;
};

struct CheckOptions {
  std::size_t n_samples = 20000;
  std::uint64_t seed = 1;
  double tol = 1e-9;
  /// Coordinate-descent evaluations spent refining the worst sample.
  std::size_t refine_budget = 400;
};

/// Half Halton points, half uniform random (seeded), mapped into the domain.
std::vector<Sample> generate_samples(const SamplingDomain& domain, std::size_t n, std::uint64_t seed);

struct InequalityReport {
  std::string name;
  std::size_t n_samples = 0;
  /// Positive means satisfied with slack.
  double worst_margin = 0.0;
  Sample worst_point;
  bool pass = false;
  double tol = 0.0;
  std::string domain;
  std::uint64_t seed = 0;
  bool horizon_limited = false;
  std::string note;
};

/// Margin of an inequality at a sample; nullopt when the sample lies
/// outside the implication's premise.
using Margin = std::function<std::optional<double>(const Sample&)>;

/// Minimum of `margin` over `samples`, optionally refined by coordinate
/// descent inside `domain`.
InequalityReport evaluate_margin(std::string name, const Margin& margin, const std::vector<Sample>& samples,
                                 const SamplingDomain& domain, const CheckOptions& opts);

/// min{V - alpha1(|x|), alpha2(|x|) - V, alpha3(|x|) - |grad V|}.
InequalityReport check_uppd(const LyapunovCandidate& v, const SamplingDomain& domain, const CheckOptions& opts = {});

/// Over samples with |x| >= chi(|u|): -Vdot - p(t) mu(|x|).
InequalityReport check_issp_lyap(const LyapunovCandidate& v, const ControlSystem& sys, const DecayRate& p,
                                 const GainFunction& mu, const GainFunction& chi, const SamplingDomain& domain,
                                 const CheckOptions& opts = {});

enum class DisForm {
  State,  // -p(t) mu(|x|)
  Value,  // -p(t) mu_tilde(V(t, x))
};

/// -Vdot - p(t) term + Omega(|u|) over all samples.
InequalityReport check_disp_lyap(const LyapunovCandidate& v, const ControlSystem& sys, const DecayRate& p,
                                 const GainFunction& term, const GainFunction& omega, DisForm form,
                                 const SamplingDomain& domain, const CheckOptions& opts = {});

/// check_issp_lyap with p = 1.
InequalityReport check_strict_iss_lyap(const LyapunovCandidate& v, const ControlSystem& sys, const GainFunction& mu,
                                       const GainFunction& chi, const SamplingDomain& domain,
                                       const CheckOptions& opts = {});

struct FalsifyResult {
  Sample worst_point;
  double margin = 0.0;
  bool pass = false;
  std::size_t evaluations = 0;
};

/// Uniform random search over half the budget, then coordinate descent
/// around the best candidate. Deterministic for a given seed.
FalsifyResult falsify(const Margin& predicate, const SamplingDomain& domain, std::size_t budget,
                      std::uint64_t seed = 1, double tol = 1e-9);

/// min over trajectories and samples of
///   beta(|x0|, int_{t0}^{t} p) + gamma(sup_{[t0, t]} |u|) - |x(t)|.
InequalityReport check_iss_estimate(std::span<const Trajectory> batch, const DecayRate& p, const KLFunction& beta,
                                    const GainFunction& gamma, double tol = 1e-9);

struct IssEnvelope {
  KLFunction beta;
  GainFunction gamma;
  double gain_c = 0.0;
  double rate_lambda = 0.0;
  InequalityReport heldout;
};

/// Fits beta(s, r) = C s exp(-lambda r) on zero-input runs and a monotone
/// gamma on disturbance runs, then checks both on held-out runs (every
/// second run of each kind). Throws fit-failed when there is no zero-input
/// run or the held-out check fails.
IssEnvelope fit_iss_envelope(std::span<const Trajectory> batch, const DecayRate& p);

}  // namespace strictlyap
