#include "strictlyap/cli/fixtures.hpp"

#include <array>
#include <utility>

namespace strictlyap::cli {

namespace {

// Velocity error dynamics of a rotating rigid body tracking w_r = (sin t, 0, 0).
// Inputs u1, u2 are the controls (closed by [feedback]); u3, u4 remain as
// disturbances and become u1, u2 of the closed loop.
constexpr std::string_view kRigidBody = R"ini([run]
seed = 1

[system]
n = 3
m = 4
f1 = "u1 + u3 - cos(t)"
f2 = "u2 + u4"
f3 = "(x1 + sin(t))*x2"
period = "2*pi"

[feedback]
u1 = "-x1 - x2*x3 + cos(t)"
u2 = "-(1 + sin(t)*x1 + sin(t)^2)*x2 - (2*sin(t) + cos(t))*x3"

[lyapunov]
V = "(x1^2 + (x2 + sin(t)*x3)^2 + x3^2)/2"
alpha1 = "(3 - sqrt(5))/4*s^2"
alpha2 = "(3 + sqrt(5))/4*s^2"
alpha3 = "(3 + sqrt(5))/2*s + (1 + sqrt(2))/2*s^2"
period = "2*pi"

[rate]
p = "sin(t)^2"
tau = "pi"
period = "pi"

[gains]
mu_tilde = "s"
omega = "s^2/2"

[strictify]
mode = "disp-value"
factor = "1/8"

[domain]
t_min = "0"
t_max = "2*pi"
x_max = "5"
u_max = "2"

[sim]
t0 = "0"
tf = "30"
step = "0.001"
x0 = "1, -1, 2; -2, 0.5, 1; 0.5, 2, -1; 2, 1, 0.5"
u = "0.1*sin(3*t), 0.1*cos(5*t)"

[verify]
target = "sharp"

[expect]
vsharp_coefficient = "1 + pi/32 - sin(2*t)/32"
xi = "(pi/4)*(pi - sin(2*t))"
)ini";

// Strictly ISS but not dissipative: the input gain grows with t.
constexpr std::string_view kCounterexample = R"ini([run]
seed = 1

[system]
n = 1
m = 1
f1 = "-x1 + (1 + t)*max(0, u1 - abs(x1))^3"

[lyapunov]
V = "x1^2"
alpha1 = "s^2"
alpha2 = "s^2"
alpha3 = "2*s"

[rate]
p = "1"
tau = "1"

[gains]
mu = "s^2"
chi = "s"

[strictify]
mode = "disp-state"

[domain]
t_min = "0"
t_max = "10"
x_max = "10"
u_max = "5"

[omega]
t_max = "10"
s_max = "2"

[sim]
t0 = "0"
tf = "10"
step = "0.001"
x0 = "1; -0.5"
u = "0.5"
)ini";

constexpr std::string_view kScalarLinear = R"ini([run]
seed = 1

[system]
n = 1
m = 1
f1 = "-x1 + u1"

[lyapunov]
V = "x1^2/2"
alpha1 = "s^2/2"
alpha2 = "s^2/2"
alpha3 = "s"

[rate]
p = "1"
tau = "1"

[gains]
mu = "s^2/2"
chi = "2*s"
omega = "s^2/2"

[strictify]
mode = "issp"

[domain]
t_min = "0"
t_max = "2"
x_max = "10"
u_max = "5"

[sim]
t0 = "0"
tf = "10"
step = "0.001"
x0 = "1; -2; 0.5; 3"
u = "0.5*sin(t)"
)ini";

constexpr std::array<std::pair<std::string_view, std::string_view>, 3> kFixtures{{
    {"rigid-body", kRigidBody},
    {"counterexample-elw", kCounterexample},
    {"scalar-linear", kScalarLinear},
}};

}  // namespace

std::vector<std::string> fixture_names() {
  std::vector<std::string> out;
  for (const auto& [name, text] : kFixtures) out.emplace_back(name);
  return out;
}

std::optional<std::string> fixture_text(std::string_view name) {
  for (const auto& [n, text] : kFixtures) {
    if (n == name) return std::string(text);
  }
  return std::nullopt;
}

}  // namespace strictlyap::cli
