#pragma once

// Problems shared by the unit and acceptance suites, built from the core
// API only.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "strictlyap/strictlyap.hpp"

namespace strictlyap::testing {

inline expr::Expr E(const std::string& text) { return expr::parse(text); }

inline constexpr double kPi = std::numbers::pi;
inline const double kAlpha1Coeff = (3.0 - std::sqrt(5.0)) / 4.0;
inline const double kAlpha2Coeff = (3.0 + std::sqrt(5.0)) / 4.0;

inline const char* const kRigidV = "(x1^2 + (x2 + sin(t)*x3)^2 + x3^2)/2";
inline const char* const kRigidDelta1 = "-x1 - x2*x3 + cos(t)";
inline const char* const kRigidDelta2 = "-(1 + sin(t)*x1 + sin(t)^2)*x2 - (2*sin(t) + cos(t))*x3";

inline ControlSystem rigid_body_open_loop() {
  return ControlSystem::from_exprs({E("u1 + u3 - cos(t)"), E("u2 + u4"), E("(x1 + sin(t))*x2")}, 4, 2 * kPi);
}

/// Velocity-error dynamics in closed loop; inputs are the two disturbances.
inline ControlSystem rigid_body() {
  return close_loop(rigid_body_open_loop(), feedback_from_exprs({E(kRigidDelta1), E(kRigidDelta2)}), 2);
}

inline LyapunovCandidate rigid_body_v() {
  return LyapunovCandidate::from_expr(E(kRigidV), 3, GainFunction::monomial(kAlpha1Coeff, 2),
                                      GainFunction::monomial(kAlpha2Coeff, 2),
                                      GainFunction::polynomial({0.0, (3.0 + std::sqrt(5.0)) / 2.0,
                                                                (1.0 + std::sqrt(2.0)) / 2.0}),
                                      2 * kPi);
}

inline DecayRate sin_squared() { return DecayRate::parse("sin(t)^2", kPi); }

/// Strict-DIS certificate with w(s) = s/(8 pi).
inline StrictCertificate rigid_body_certificate(const CheckOptions& opts = {}) {
  const DecayRate p = sin_squared();
  SamplingDomain d{3, 2, 0.0, 2 * kPi, 5.0, 2.0};
  return strictify_disp(rigid_body_v(), rigid_body(), p, estimate_pe(p, kPi), GainFunction::identity(),
                        GainFunction::monomial(0.5, 2), kExampleFactor, d, opts);
}

/// xdot = -x + (1 + t) max(0, u - |x|)^3 with V = x^2.
inline ControlSystem growing_gain_system() {
  return ControlSystem::from_exprs({E("-x1 + (1 + t)*max(0, u1 - abs(x1))^3")}, 1);
}

inline LyapunovCandidate square_v() {
  return LyapunovCandidate::from_expr(E("x1^2"), 1, GainFunction::monomial(1, 2), GainFunction::monomial(1, 2),
                                      GainFunction::linear(2));
}

inline LyapunovCandidate half_square_v() {
  return LyapunovCandidate::from_expr(E("x1^2/2"), 1, GainFunction::monomial(0.5, 2),
                                      GainFunction::monomial(0.5, 2), GainFunction::identity());
}

}  // namespace strictlyap::testing
