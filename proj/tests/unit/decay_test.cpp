#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "strictlyap/decay.hpp"
#include "strictlyap/error.hpp"

namespace strictlyap {
namespace {

constexpr double kPi = std::numbers::pi;

// (1 + e^{-t}) max(0, sin t)^3 with tau = 2 pi over [0, 4 pi]; mpmath, 25 digits.
constexpr double kPrEpsilon = 1.333917776008116821;
constexpr double kPrPbar = 131.9727871479236585;

TEST(EstimatePe, SinSquared) {
  const PeEstimate est = estimate_pe(DecayRate::parse("sin(t)^2", kPi), kPi);
  EXPECT_NEAR(est.epsilon, kPi / 2, 1e-6);
  EXPECT_NEAR(est.pbar, 1.0, 1e-9);
  EXPECT_NEAR(est.epsilon_certified, 0.99 * est.epsilon, 1e-15);
  EXPECT_NEAR(est.pbar_certified, 1.01 * est.pbar, 1e-15);
  EXPECT_FALSE(est.horizon_limited);
  EXPECT_DOUBLE_EQ(est.horizon, 2 * kPi);
}

TEST(EstimatePe, Constant) {
  const PeEstimate est = estimate_pe(DecayRate::constant(1.0), 1.0);
  EXPECT_NEAR(est.epsilon, 1.0, 1e-12);
  EXPECT_NEAR(est.pbar, 1.0, 1e-15);
  EXPECT_TRUE(est.horizon_limited);
}

TEST(EstimatePe, ParametrizedRateMatchesOracle) {
  const DecayRate p = DecayRate::parse("(1 + exp(-t))*max(0, sin(t))^3");
  const PeEstimate est = estimate_pe(p, 2 * kPi, 4 * kPi);
  EXPECT_NEAR(est.epsilon, kPrEpsilon, 1e-6);
  EXPECT_NEAR(est.pbar, kPrPbar, 1e-6);
}

TEST(EstimatePe, NotPersistentlyExciting) {
  try {
    estimate_pe(DecayRate::parse("max(0, sin(t))", 2 * kPi), 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotPersistentlyExciting);
  }
  EXPECT_THROW(estimate_pe(DecayRate::constant(0.0), 1.0), Error);
}

TEST(EstimatePe, RejectsBadArguments) {
  EXPECT_THROW(estimate_pe(DecayRate::constant(1.0), 0.0), Error);
  EXPECT_THROW(estimate_pe(DecayRate::constant(1.0), 2.0, 1.0), Error);
}

TEST(ScanTau, ReportsZeroWhenNotPe) {
  const DecayRate p = DecayRate::parse("max(0, sin(t))", 2 * kPi);
  const std::vector<double> taus{1.0, 2 * kPi};
  const auto scan = scan_tau(p, taus);
  EXPECT_EQ(scan[0].second, 0.0);
  // Simpson across the kinks of max(0, sin t) is only O(h^2) accurate.
  EXPECT_NEAR(scan[1].second, 2.0, 1e-6);
}

TEST(Extension, Policies) {
  const auto f = [](double t) { return t * t; };
  EXPECT_DOUBLE_EQ(DecayRate(f, "t^2")(-2.0), 4.0);
  EXPECT_DOUBLE_EQ(DecayRate(f, "t^2", std::nullopt, Extension::Hold)(-2.0), 0.0);
  EXPECT_DOUBLE_EQ(DecayRate(f, "t^2", 3.0)(-1.0), 4.0);
  EXPECT_THROW(DecayRate(f, "t^2", std::nullopt, Extension::Periodic), Error);
}

TEST(Xi, Examples) {
  EXPECT_NEAR(xi(DecayRate::constant(1.0), 2.5, 7.0), 2.5 * 2.5 / 2, 1e-12);
  const DecayRate p = DecayRate::parse("sin(t)^2", kPi);
  EXPECT_NEAR(xi(p, kPi, 0.0), kPi * kPi / 4, 1e-10);
  EXPECT_NEAR(xi(p, kPi, kPi / 4), kPi / 4 * (kPi - 1), 1e-10);
}

// Nested composite Simpson of int_{t-tau}^t int_s^t p(r) dr ds.
double nested_simpson(const DecayRate& p, double tau, double t, int n) {
  auto inner = [&](double s) {
    const double h = (t - s) / n;
    double acc = p(s) + p(t);
    for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * p(s + i * h);
    return acc * h / 3.0;
  };
  const double h = tau / n;
  double acc = inner(t - tau) + inner(t);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * inner(t - tau + i * h);
  return acc * h / 3.0;
}

// One Richardson step on the O(h^4) nested rule.
double nested_xi(const DecayRate& p, double tau, double t) {
  return (16.0 * nested_simpson(p, tau, t, 600) - nested_simpson(p, tau, t, 300)) / 15.0;
}

TEST(Xi, FubiniIdentity) {
  const std::vector<std::pair<std::string, double>> rates = {
      {"sin(t)^2", kPi}, {"1 + cos(3*t)*exp(-t^2)", 2.0}, {"(1 + exp(-t))*sin(t)^4", 2 * kPi}};
  for (const auto& [text, tau] : rates) {
    const DecayRate p = DecayRate::parse(text);
    for (double t : {0.0, 0.7, 2.3, 5.1}) {
      EXPECT_NEAR(xi(p, tau, t), nested_xi(p, tau, t), 1e-8) << text << " at t=" << t;
    }
  }
}

TEST(XiFunction, TableMatchesDirectQuadrature) {
  const DecayRate p = DecayRate::parse("sin(t)^2*(1 + 0.5*cos(2*t))", kPi);
  const XiFunction table(p, kPi);
  ASSERT_TRUE(table.tabulated());
  for (double t = -3.0; t < 20.0; t += 0.173) {
    EXPECT_NEAR(table.value(t), xi(p, kPi, t), 1e-10);
    EXPECT_NEAR(table.window(t), window_integral(p, t - kPi, t), 1e-10);
    const double h = 1e-5;
    EXPECT_NEAR(table.rate(t), (xi(p, kPi, t + h) - xi(p, kPi, t - h)) / (2 * h), 1e-6);
  }
}

TEST(XiFunction, UntabulatedForAperiodicRates) {
  const DecayRate p = DecayRate::parse("1 + exp(-t)");
  const XiFunction direct(p, 1.5);
  EXPECT_FALSE(direct.tabulated());
  EXPECT_NEAR(direct.value(2.0), xi(p, 1.5, 2.0), 1e-14);
  EXPECT_NEAR(direct.rate(2.0), 1.5 * p(2.0) - window_integral(p, 0.5, 2.0), 1e-12);
}

TEST(UnderlineP, Examples) {
  EXPECT_NEAR(underline_p(DecayRate::constant(1.0), 3.7, 10.0), 3.7, 1e-12);
  EXPECT_NEAR(underline_p(DecayRate::parse("sin(t)^2", kPi), kPi, 2 * kPi), kPi / 2, 1e-9);
  EXPECT_EQ(underline_p(DecayRate::parse("sin(t)^2", kPi), 0.0, 2 * kPi), 0.0);
  EXPECT_THROW(underline_p(DecayRate::constant(1.0), -1.0, 1.0), Error);
}

// Nonnegative rates of period pi: sum_k a_k sin(k t + phi_k)^2.
DecayRate random_periodic_rate(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> a(0.05, 1.0);
  std::uniform_real_distribution<double> phi(0.0, kPi);
  std::string text;
  for (int k = 1; k <= 3; ++k) {
    if (!text.empty()) text += " + ";
    text += std::to_string(a(rng)) + "*sin(" + std::to_string(k) + "*t + " + std::to_string(phi(rng)) + ")^2";
  }
  return DecayRate::parse(text, kPi);
}

TEST(PeProperties, XiBoundsAndUnderlinePGrowth) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> tau_d(kPi / 2, 2 * kPi);
  std::uniform_real_distribution<double> t_d(0.0, 50.0);
  for (int trial = 0; trial < 4; ++trial) {
    const DecayRate p = random_periodic_rate(rng);
    const double tau = tau_d(rng);
    const PeEstimate pe = estimate_pe(p, tau);
    for (int k = 0; k < 200; ++k) {
      const double v = xi(p, tau, t_d(rng));
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, tau * tau * pe.pbar / 2 + 1e-9);
    }
    double prev = -1.0;
    for (double h = 0.0; h <= 12.0; h += 1.0) {
      const double v = underline_p(p, h, kPi + h);
      EXPECT_GE(v, prev - 1e-12) << p.label() << " h=" << h;
      prev = v;
    }
    for (int k = 1; k <= 5; ++k) {
      EXPECT_GE(underline_p(p, k * tau, kPi + k * tau), k * pe.epsilon - 1e-6) << p.label() << " k=" << k;
    }
  }
}

}  // namespace
}  // namespace strictlyap
