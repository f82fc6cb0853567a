#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "support/fixtures.hpp"

namespace strictlyap {
namespace {

using testing::E;
using testing::kPi;

TEST(Integrate, ExponentialDecay) {
  const auto sys = ControlSystem::from_exprs({E("-x1")}, 0);
  const Vec x0{1.0};
  const Trajectory tr = integrate(sys, x0, 0.0, 1.0, Signal::zero(0), 1e-3);
  EXPECT_NEAR(tr.states.back()[0], std::exp(-1.0), 1e-9);
  EXPECT_DOUBLE_EQ(tr.times.back(), 1.0);
  EXPECT_EQ(tr.times.size(), 1001u);
}

TEST(Integrate, HarmonicOscillator) {
  const auto sys = ControlSystem::from_exprs({E("x2"), E("-x1")}, 0);
  const Vec x0{1.0, 0.0};
  const Trajectory tr = integrate(sys, x0, 0.0, 2 * kPi, Signal::zero(0), 1e-3);
  EXPECT_NEAR(tr.states.back()[0], 1.0, 1e-9);
  EXPECT_NEAR(tr.states.back()[1], 0.0, 1e-9);
}

TEST(Integrate, FourthOrderConvergence) {
  const auto sys = ControlSystem::from_exprs({E("-x1 + sin(t)*x1^2/4")}, 0);
  const Vec x0{1.0};
  const auto ref = integrate(sys, x0, 0.0, 2.0, Signal::zero(0), 1e-4).states.back()[0];
  const double e1 = std::abs(integrate(sys, x0, 0.0, 2.0, Signal::zero(0), 0.1).states.back()[0] - ref);
  const double e2 = std::abs(integrate(sys, x0, 0.0, 2.0, Signal::zero(0), 0.05).states.back()[0] - ref);
  const double ratio = e1 / e2;
  EXPECT_GE(ratio, 14.0);
  EXPECT_LE(ratio, 18.0);
}

TEST(Integrate, ShortensLastStep) {
  const auto sys = ControlSystem::from_exprs({E("1")}, 0);
  const Vec x0{0.0};
  const Trajectory tr = integrate(sys, x0, 0.0, 0.25, Signal::zero(0), 0.1);
  ASSERT_EQ(tr.times.size(), 4u);
  EXPECT_DOUBLE_EQ(tr.times.back(), 0.25);
  EXPECT_NEAR(tr.states.back()[0], 0.25, 1e-14);
}

TEST(Integrate, BlowUp) {
  const auto sys = ControlSystem::from_exprs({E("x1^2")}, 0);
  const Vec x0{1.0};
  try {
    integrate(sys, x0, 0.0, 2.0, Signal::zero(0), 1e-3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BlowUp);
  }
}

TEST(Integrate, DimensionChecks) {
  const auto sys = ControlSystem::from_exprs({E("-x1 + u1")}, 1);
  const Vec bad{1.0, 2.0};
  const Vec ok{1.0};
  EXPECT_THROW(integrate(sys, bad, 0.0, 1.0, Signal::zero(1)), Error);
  EXPECT_THROW(integrate(sys, ok, 0.0, 1.0, Signal::zero(2)), Error);
  EXPECT_THROW(integrate(sys, ok, 1.0, 1.0, Signal::zero(1)), Error);
  EXPECT_THROW(ControlSystem::from_exprs({E("x2")}, 0), Error);
  EXPECT_THROW(ControlSystem::from_exprs({E("u2")}, 1), Error);
}

TEST(CloseLoop, FeedsLeadingInputs) {
  const auto open = ControlSystem::from_exprs({E("u1 + 2*u2"), E("u3")}, 3);
  const auto closed = close_loop(open, feedback_from_exprs({E("-x1"), E("t*x2")}), 2);
  EXPECT_EQ(closed.m(), 1);
  const Vec x{1.0, 2.0};
  const Vec u{5.0};
  const Vec f = closed(3.0, x, u);
  EXPECT_DOUBLE_EQ(f[0], -1.0 + 2 * 6.0);
  EXPECT_DOUBLE_EQ(f[1], 5.0);
  EXPECT_THROW(close_loop(open, feedback_from_exprs({E("x1")}), 4), Error);
  EXPECT_THROW(feedback_from_exprs({E("u1")}), Error);
}

TEST(CloseLoop, RigidBodyVelocityError) {
  // With the feedback in place, xdot1 = -x1 - x2 x3 + u1 + u3.
  const auto sys = testing::rigid_body();
  const Vec x{0.3, -0.2, 0.5};
  const Vec u{0.1, -0.4};
  const double t = 1.1;
  const Vec f = sys(t, x, u);
  EXPECT_NEAR(f[0], -0.3 + 0.2 * 0.5 + 0.1, 1e-14);
  EXPECT_NEAR(f[2], (0.3 + std::sin(t)) * -0.2, 1e-14);
}

TEST(Signal, PiecewiseAndZero) {
  const Signal s = Signal::from_exprs(1, {{E("1")}, {E("t")}}, {2.0});
  EXPECT_DOUBLE_EQ(s(1.0)[0], 1.0);
  EXPECT_DOUBLE_EQ(s(3.0)[0], 3.0);
  EXPECT_FALSE(s.is_zero());
  EXPECT_TRUE(Signal::zero(2).is_zero());
  EXPECT_THROW(Signal::from_exprs(1, {{E("1")}, {E("2")}}, {}), Error);
  EXPECT_THROW(Signal::from_exprs(1, {{E("x1")}}), Error);
}

TEST(LyapunovAlong, RigidBodyNonIncreasingForZeroInput) {
  const auto sys = testing::rigid_body();
  const auto v = testing::rigid_body_v();
  for (const Vec& x0 : {Vec{1.0, 0.0, 0.0}, Vec{0.5, -1.0, 2.0}, Vec{-2.0, 1.0, 0.5}}) {
    const Trajectory tr = integrate(sys, x0, 0.0, 20.0, Signal::zero(2), 1e-3);
    const LyapunovSeries s = lyapunov_along(tr, v.value);
    for (std::size_t k = 1; k < s.value.size(); ++k) {
      ASSERT_LE(s.value[k], s.value[k - 1] + 1e-10) << "t=" << s.t[k];
    }
    EXPECT_LT(s.value.back(), 1e-2 * s.value.front());
  }
}

TEST(LyapunovAlong, FiniteDifferenceMatchesVdot) {
  const auto sys = testing::rigid_body();
  const auto v = testing::rigid_body_v();
  const Vec x0{0.5, -1.0, 2.0};
  const Trajectory tr = integrate(sys, x0, 0.0, 5.0, Signal::zero(2), 1e-3);
  const LyapunovSeries s = lyapunov_along(tr, v.value);
  const Vec u0{0.0, 0.0};
  for (std::size_t k = 1; k + 1 < s.t.size(); k += 97) {
    EXPECT_NEAR(s.dvalue_fd[k], v.vdot(sys, tr.times[k], tr.states[k], u0), 1e-5);
  }
}

TEST(Periodicity, TimeShiftByPeriod) {
  // For a 2 pi periodic field, starting at t0 + 2 pi reproduces the run from t0.
  const auto sys = testing::rigid_body();
  const Vec x0{0.5, -1.0, 2.0};
  const Trajectory a = integrate(sys, x0, 0.3, 5.3, Signal::zero(2), 1e-3);
  const Trajectory b = integrate(sys, x0, 0.3 + 2 * kPi, 5.3 + 2 * kPi, Signal::zero(2), 1e-3);
  ASSERT_EQ(a.states.size(), b.states.size());
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(a.states.back()[i], b.states.back()[i], 1e-9);
}

TEST(TrajectoryCsv, HeaderAndRows) {
  const auto sys = ControlSystem::from_exprs({E("-x1 + u1"), E("x1")}, 1);
  const Vec x0{1.0, 0.0};
  const Trajectory tr = integrate(sys, x0, 0.0, 0.5, Signal::zero(1), 0.25);
  std::ostringstream out;
  write_trajectory_csv(out, tr, {{"V", {1.0, 2.0, 3.0}}});
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,x1,x2,u1,V");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3);
}

}  // namespace
}  // namespace strictlyap
