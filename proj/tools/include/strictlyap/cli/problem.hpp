#pragma once

#include <optional>
#include <string>

#include "strictlyap/cli/config.hpp"
#include "strictlyap/decay.hpp"
#include "strictlyap/dynsys.hpp"
#include "strictlyap/funcalc.hpp"
#include "strictlyap/lyapunov.hpp"
#include "strictlyap/strictify.hpp"
#include "strictlyap/verify.hpp"

namespace strictlyap::cli {

/// A parsed configuration: the closed-loop system, V and every optional
/// ingredient that the config declares.
struct Problem {
  ProblemConfig config;
  ControlSystem system;
  LyapunovCandidate v;
  std::optional<DecayRate> p;
  std::optional<double> tau;
  std::optional<GainFunction> mu;
  std::optional<GainFunction> mu_tilde;
  std::optional<GainFunction> omega;
  std::optional<GainFunction> chi;
  SamplingDomain domain;
  CheckOptions check;
  Signal signal;

  const DecayRate& rate() const;
  double window() const;
  const GainFunction& gain(const std::optional<GainFunction>& g, const char* key) const;
};

Problem build_problem(const ProblemConfig& cfg);

/// Runs the configured strictification route. With mode disp-state and no
/// omega the envelope is built by construct_omega from mu and chi.
StrictCertificate build_certificate(const Problem& problem, std::optional<OmegaEnvelope>* envelope = nullptr);

}  // namespace strictlyap::cli
