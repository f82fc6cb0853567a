// Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "strictlyap/cli/commands.hpp"
#include "strictlyap/cli/problem.hpp"
#include "support/fixtures.hpp"

namespace sl = strictlyap;
using sl::testing::E;
using sl::testing::kPi;

namespace {

// Pinned tolerances and budgets.
constexpr double kXiTol = 1e-6;
constexpr double kXiSeconds = 1.0;
constexpr double kEpsTol = 1e-6;
constexpr double kPbarTol = 1e-9;
constexpr double kPeSeconds = 1.0;
constexpr std::size_t kContractSamples = 100000;
constexpr double kContractTol = 1e-9;
constexpr double kContractSeconds = 30.0;
constexpr int kInvariantCombos = 20;
constexpr std::size_t kBoundsSamples = 10000;
constexpr double kSlopeTol = 1e-12;
constexpr int kPeRates = 10;
constexpr double kUnderlineTol = 1e-6;
constexpr int kDecayRuns = 20;
constexpr double kDecayMonotoneTol = 1e-7;
constexpr double kDecayLevel = 1e-4;
constexpr double kDecayHorizon = 60.0;
constexpr double kProbeTol = 1e-9;
constexpr double kSeparation = 100.0;
constexpr int kDerivativePoints = 100;
constexpr double kDerivativeRelTol = 1e-6;
constexpr double kAlongRelTol = 1e-4;
constexpr double kOrderLo = 14.0;
constexpr double kOrderHi = 18.0;
constexpr int kImplicationSystems = 10;

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// sum_k a_k sin(k t + phi_k)^2, k = 1..3, period pi.
sl::DecayRate random_rate(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> a(0.05, 1.0);
  std::uniform_real_distribution<double> phi(0.0, kPi);
  std::string text;
  for (int k = 1; k <= 3; ++k) {
    if (!text.empty()) text += " + ";
    text += fmt::format("{}*sin({}*t + {})^2", a(rng), k, phi(rng));
  }
  return sl::DecayRate::parse(text, kPi);
}

Outcome xi_closed_form() {
  const auto t0 = std::chrono::steady_clock::now();
  const sl::DecayRate p = sl::testing::sin_squared();
  const sl::XiFunction table(p, kPi);
  double err = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double t = 4 * kPi * i / 99.0;
    const double exact = kPi / 4 * (kPi - std::sin(2 * t));
    err = std::max({err, std::abs(sl::xi(p, kPi, t) - exact), std::abs(table.value(t) - exact)});
  }
  const auto cert = sl::testing::rigid_body_certificate();
  double coeff_err = 0.0;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> x_d(-2.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    const double t = 4 * kPi * i / 99.0;
    const sl::Vec x{x_d(rng), x_d(rng), x_d(rng)};
    const double v = cert.base(t, x);
    if (v < 1e-6) continue;
    coeff_err = std::max(coeff_err, std::abs(cert.v_sharp(t, x) / v - (1 + kPi / 32 - std::sin(2 * t) / 32)));
  }
  const double secs = seconds_since(t0);
  return {err <= kXiTol && coeff_err <= kXiTol && secs < kXiSeconds,
          fmt::format("max |xi - (pi/4)(pi - sin 2t)| = {:.3g}, coefficient error {:.3g} (tol {:g}), {:.2f} s", err,
                      coeff_err, kXiTol, secs)};
}

Outcome pe_values() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto problem = sl::cli::build_problem(sl::cli::fixture_config("rigid-body"));
  const auto est = sl::estimate_pe(problem.rate(), problem.window());
  sl::cli::RunOptions opts;
  opts.out_dir = "acceptance_out/pe";
  std::ostringstream sink;
  const int code = sl::cli::cmd_pe(sl::cli::fixture_config("rigid-body"), opts, sink);
  const double secs = seconds_since(t0);
  const double de = std::abs(est.epsilon - kPi / 2);
  const double dp = std::abs(est.pbar - 1.0);
  return {code == 0 && de <= kEpsTol && dp <= kPbarTol && secs < kPeSeconds,
          fmt::format("eps = {:.12f} (|err| {:.2g}), pbar = {:.12f} (|err| {:.2g}), exit {}, {:.2f} s", est.epsilon,
                      de, est.pbar, dp, code, secs)};
}

Outcome dis_contract() {
  const auto t0 = std::chrono::steady_clock::now();
  sl::CheckOptions opts;
  opts.n_samples = kContractSamples;
  opts.tol = kContractTol;
  const auto cert = sl::testing::rigid_body_certificate(opts);
  // Contract with the raw constants: eps = pi/2, w(s) = s/(8 pi).
  const sl::SamplingDomain d{3, 2, 0.0, 2 * kPi, 5.0, 2.0};
  const sl::Margin margin = [&](const sl::Sample& s) -> std::optional<double> {
    const double r = sl::norm(s.x);
    const double a1 = sl::testing::kAlpha1Coeff * r * r;
    const double un = sl::norm(s.u);
    return -cert.vdot_sharp(s.t, s.x, s.u) - kPi / 2 * a1 / (8 * kPi) + 1.25 * un * un / 2;
  };
  const auto rep = sl::evaluate_margin("rigid-body strict-DIS", margin, sl::generate_samples(d, kContractSamples, 1),
                                       d, opts);
  const double secs = seconds_since(t0);
  return {rep.pass && cert.valid() && secs < kContractSeconds,
          fmt::format("{} samples, worst margin {:.3g} at t={:.4f} (tol {:g}); certificate checks {}, {:.1f} s",
                      rep.n_samples, rep.worst_margin, rep.worst_point.t, kContractTol,
                      cert.valid() ? "pass" : "fail", secs)};
}

Outcome certificate_invariants() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> tau_d(kPi / 2, 2 * kPi);
  std::uniform_real_distribution<double> c_d(0.1, 0.5);
  int issued = 0;
  double worst_bounds = std::numeric_limits<double>::infinity();
  double worst_slope = std::numeric_limits<double>::infinity();
  std::string failure;
  for (int k = 0; k < kInvariantCombos; ++k) {
    const sl::DecayRate p = random_rate(rng);
    const double tau = tau_d(rng);
    const double c = c_d(rng);
    const auto mu = sl::GainFunction::monomial(c, 2);
    // xdot = p(t)(-x + u): Vdot = p(-x^2 + x u) <= -p mu(|x|) on |x| >= 2|u|
    // and <= -p mu(|x|) + pbar u^2/2 everywhere.
    const auto sys = sl::ControlSystem::from_exprs({E("(" + p.label() + ")*(-x1 + u1)")}, 1, kPi);
    const auto pe = sl::estimate_pe(p, tau);
    const auto d = sl::default_domain(sys, p, tau);
    sl::CheckOptions opts;
    opts.n_samples = 4000;
    opts.seed = static_cast<std::uint64_t>(k + 1);
    try {
      const auto cert =
          k % 2 == 0
              ? sl::strictify_issp(sl::testing::half_square_v(), sys, p, pe, sl::GainFunction::linear(2), mu, d, opts)
              : sl::strictify_disp_state(sl::testing::half_square_v(), sys, p, pe, mu,
                                         sl::GainFunction::monomial(pe.pbar / 2, 2), d, opts);
      ++issued;
      for (const auto& s : sl::generate_samples(d, kBoundsSamples, 100 + k)) {
        const double scale = cert.scale(s.t, s.x);
        worst_bounds = std::min({worst_bounds, scale - 1.0, 1.25 - scale});
      }
      const double bound = 1.0 / (2 * cert.pe.tau * cert.pe.tau * cert.pe.pbar);
      for (int i = 0; i <= 2000; ++i) {
        const double s = 20.0 * i / 2000.0;
        const double dw = cert.w.derivative(s);
        worst_slope = std::min({worst_slope, dw, bound - dw});
      }
    } catch (const sl::Error& e) {
      if (failure.empty()) failure = fmt::format("combo {} ({}, tau={:.3f}): {}", k, p.label(), tau, e.what());
    }
  }
  const bool pass = issued == kInvariantCombos && worst_bounds >= 0.0 && worst_slope >= -kSlopeTol;
  return {pass, fmt::format("{}/{} certificates issued; min over samples of min(c-1, 5/4-c) = {:.3g}; "
                            "min slope margin {:.3g}{}",
                            issued, kInvariantCombos, worst_bounds, worst_slope,
                            failure.empty() ? "" : "; " + failure)};
}

Outcome pe_window_suite() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> tau_d(kPi / 2, 2 * kPi);
  std::uniform_real_distribution<double> t_d(0.0, 50.0);
  double xi_lo = std::numeric_limits<double>::infinity();
  double xi_hi = std::numeric_limits<double>::infinity();
  double mono = std::numeric_limits<double>::infinity();
  double growth = std::numeric_limits<double>::infinity();
  for (int k = 0; k < kPeRates; ++k) {
    const sl::DecayRate p = random_rate(rng);
    const double tau = tau_d(rng);
    const auto pe = sl::estimate_pe(p, tau);
    for (int i = 0; i < 500; ++i) {
      const double v = sl::xi(p, tau, t_d(rng));
      xi_lo = std::min(xi_lo, v);
      xi_hi = std::min(xi_hi, tau * tau * pe.pbar / 2 - v);
    }
    const auto under = [&](double h) { return sl::underline_p(p, h, kPi + h); };
    double prev = 0.0;
    for (int i = 1; i <= 100; ++i) {
      const double v = under(0.2 * i);
      mono = std::min(mono, v - prev);
      prev = v;
    }
    for (int j = 1; j <= 5; ++j) growth = std::min(growth, under(j * tau) - j * pe.epsilon);
  }
  const bool pass = xi_lo >= 0.0 && xi_hi >= 0.0 && mono >= 0.0 && growth >= -kUnderlineTol;
  return {pass, fmt::format("{} rates: min xi {:.3g}, min(tau^2 pbar/2 - xi) {:.3g}, min increment of p_ {:.3g}, "
                            "min p_(k tau) - k eps {:.3g} (tol {:g})",
                            kPeRates, xi_lo, xi_hi, mono, growth, kUnderlineTol)};
}

Outcome simulation_decay() {
  const auto cert = sl::testing::rigid_body_certificate();
  std::mt19937_64 rng(606);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> r_d(0.0, 1.0);
  double worst_rise = -std::numeric_limits<double>::infinity();
  double latest = 0.0;
  int reached = 0;
  for (int k = 0; k < kDecayRuns; ++k) {
    sl::Vec x0{g(rng), g(rng), g(rng)};
    const double scale = 3.0 * std::cbrt(r_d(rng)) / sl::norm(x0);
    for (double& c : x0) c *= scale;
    const auto tr = sl::integrate(cert.system, x0, 0.0, kDecayHorizon, sl::Signal::zero(2), 1e-3);
    double prev = cert.v_sharp(tr.times[0], tr.states[0]);
    std::optional<double> hit;
    for (std::size_t i = 1; i < tr.times.size(); ++i) {
      const double v = cert.v_sharp(tr.times[i], tr.states[i]);
      worst_rise = std::max(worst_rise, v - prev);
      prev = v;
      if (!hit && v < kDecayLevel) hit = tr.times[i];
    }
    if (hit) {
      ++reached;
      latest = std::max(latest, *hit);
    }
  }
  return {worst_rise <= kDecayMonotoneTol && reached == kDecayRuns,
          fmt::format("{} runs: largest step increase of V# {:.3g} (tol {:g}); {}/{} below {:g}, latest at t={:.2f}",
                      kDecayRuns, worst_rise, kDecayMonotoneTol, reached, kDecayRuns, kDecayLevel, latest)};
}

Outcome growing_gain_separation() {
  const auto problem = sl::cli::build_problem(sl::cli::fixture_config("counterexample-elw"));
  const auto& mu = problem.gain(problem.mu, "mu");
  const auto& chi = problem.gain(problem.chi, "chi");
  sl::SamplingDomain d = problem.domain;
  d.t_min = 0.0;
  d.t_max = 100.0;
  const auto iss = sl::check_strict_iss_lyap(problem.v, problem.system, mu, chi, d);

  const sl::Vec x{1.0};
  const sl::Vec u{2.0};
  const double probe = problem.v.vdot(problem.system, 10.0, x, u) - problem.v.vdot(problem.system, 0.0, x, u);

  const sl::DecayRate one = sl::DecayRate::constant(1.0);
  const auto omega = sl::GainFunction::monomial(1, 2);
  d.t_max = 10.0;
  const auto m10 = sl::check_disp_lyap(problem.v, problem.system, one, mu, omega, sl::DisForm::State, d);
  d.t_max = 100.0;
  const auto m100 = sl::check_disp_lyap(problem.v, problem.system, one, mu, omega, sl::DisForm::State, d);
  const bool pass = iss.pass && iss.worst_margin >= 0.0 && std::abs(probe - 20.0) <= kProbeTol &&
                    m100.worst_margin <= m10.worst_margin - kSeparation;
  return {pass, fmt::format("strict-ISS margin {:.3g}; Vdot(10,1,2) - Vdot(0,1,2) = {:.12g}; DIS margin {:.4g} on "
                            "[0,10], {:.4g} on [0,100]",
                            iss.worst_margin, probe, m10.worst_margin, m100.worst_margin)};
}

struct ExprCase {
  std::string text;
  int n;
  int m;
};

Outcome derivative_crosscheck() {
  std::vector<ExprCase> cases;
  int skipped = 0;
  for (const char* name : {"rigid-body", "counterexample-elw", "scalar-linear"}) {
    const auto cfg = sl::cli::fixture_config(name);
    auto add = [&](const std::string& text) { cases.push_back({text, cfg.n, cfg.m}); };
    for (const auto& f : cfg.f) add(f);
    for (const auto& f : cfg.feedback) add(f);
    add(cfg.v);
    add(cfg.alpha1);
    add(cfg.alpha2);
    add(cfg.alpha3);
    if (cfg.p) add(*cfg.p);
    for (const auto& [key, text] : cfg.gains) add(text);
  }
  std::mt19937_64 rng(808);
  std::uniform_real_distribution<double> t_d(0.0, 2 * kPi);
  std::uniform_real_distribution<double> x_d(-2.0, 2.0);
  std::uniform_real_distribution<double> s_d(0.1, 3.0);
  double worst = 0.0;
  std::string worst_where;
  int compared = 0;
  for (const auto& c : cases) {
    const sl::expr::Expr e = E(c.text);
    if (!e.is_smooth()) {
      ++skipped;
      continue;
    }
    std::vector<sl::expr::Variable> vars{sl::expr::Variable::time(), sl::expr::Variable::arg()};
    for (int i = 0; i < c.n; ++i) vars.push_back(sl::expr::Variable::state(i));
    for (int i = 0; i < c.m; ++i) vars.push_back(sl::expr::Variable::input(i));
    for (const auto& var : vars) {
      if (!e.depends_on(var)) continue;
      const sl::expr::Expr de = e.differentiate(var);
      for (int k = 0; k < kDerivativePoints; ++k) {
        sl::Vec x(c.n), u(c.m);
        for (double& v : x) v = x_d(rng);
        for (double& v : u) v = x_d(rng);
        double t = t_d(rng), s = s_d(rng);
        auto eval_at = [&](double delta) {
          double tt = t, ss = s;
          sl::Vec xx = x, uu = u;
          switch (var.kind) {
            case sl::expr::VarKind::Time: tt += delta; break;
            case sl::expr::VarKind::Arg: ss += delta; break;
            case sl::expr::VarKind::State: xx[var.index] += delta; break;
            case sl::expr::VarKind::Input: uu[var.index] += delta; break;
          }
          sl::expr::Bindings b;
          b.t = tt;
          b.s = ss;
          b.x = xx;
          b.u = uu;
          return e.eval(b);
        };
        const double h = 1e-5;
        const double fd = (eval_at(h) - eval_at(-h)) / (2 * h);
        sl::expr::Bindings b;
        b.t = t;
        b.s = s;
        b.x = x;
        b.u = u;
        const double an = de.eval(b);
        const double rel = std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1.0});
        ++compared;
        if (rel > worst) {
          worst = rel;
          worst_where = fmt::format("d/d{} of {}", var.name(), c.text);
        }
      }
    }
  }

  // Analytic Vdot# against finite differences of V# along trajectories.
  const auto cert = sl::testing::rigid_body_certificate();
  const sl::Signal u = sl::Signal::from_exprs(2, {{E("0.1*sin(3*t)"), E("0.1*cos(5*t)")}});
  double worst_along = 0.0;
  for (const sl::Vec& x0 : {sl::Vec{1.0, -1.0, 2.0}, sl::Vec{-2.0, 0.5, 1.0}, sl::Vec{0.5, 2.0, -1.0}}) {
    const auto tr = sl::integrate(cert.system, x0, 0.0, 10.0, u, 1e-3);
    const auto series =
        sl::lyapunov_along(tr, [&](double t, std::span<const double> x) { return cert.v_sharp(t, x); });
    for (std::size_t k = 1; k + 1 < tr.times.size(); ++k) {
      const double an = cert.vdot_sharp(tr.times[k], tr.states[k], tr.inputs[k]);
      const double rel = std::abs(an - series.dvalue_fd[k]) / std::max({std::abs(an), std::abs(series.dvalue_fd[k]), 1.0});
      worst_along = std::max(worst_along, rel);
    }
  }
  return {worst <= kDerivativeRelTol && worst_along <= kAlongRelTol,
          fmt::format("{} symbolic/FD comparisons, worst relative error {:.3g} ({}), {} non-smooth expressions "
                      "skipped; Vdot# along trajectories worst relative error {:.3g} (tol {:g})",
                      compared, worst, worst_where, skipped, worst_along, kAlongRelTol)};
}

Outcome integrator_order() {
  const auto sys = sl::ControlSystem::from_exprs({E("-x1")}, 0);
  const sl::Vec x0{1.0};
  auto err = [&](double h) {
    return std::abs(sl::integrate(sys, x0, 0.0, 1.0, sl::Signal::zero(0), h).states.back()[0] - std::exp(-1.0));
  };
  const double e1 = err(0.1);
  const double e2 = err(0.05);
  const double ratio = e1 / e2;
  return {ratio >= kOrderLo && ratio <= kOrderHi,
          fmt::format("endpoint error {:.3g} at h=0.1, {:.3g} at h=0.05, ratio {:.3f} (range [{:g}, {:g}])", e1, e2,
                      ratio, kOrderLo, kOrderHi)};
}

Outcome dis_to_iss_implication() {
  std::mt19937_64 rng(1010);
  std::uniform_real_distribution<double> a_d(0.5, 2.0);
  std::uniform_real_distribution<double> b_d(0.2, 1.5);
  std::uniform_real_distribution<double> c_d(0.0, 0.5);
  int dis_pass = 0;
  int iss_pass = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k < kImplicationSystems; ++k) {
    const double a = a_d(rng), b = b_d(rng), c = c_d(rng);
    // Vdot = -a x^2 - c x^4 + b x u cos t <= -(a/2) x^2 - c x^4 + (b^2 / 2a) u^2.
    const auto sys = sl::ControlSystem::from_exprs(
        {E(fmt::format("-{}*x1 - {}*x1^3 + {}*cos(t)*u1", a, c, b))}, 1, 2 * kPi);
    const auto mu = sl::GainFunction::polynomial({0.0, 0.0, a / 2, 0.0, c});
    const auto omega = sl::GainFunction::monomial(b * b / (2 * a), 2);
    const sl::DecayRate p = random_rate(rng);
    const auto pe = sl::estimate_pe(p, kPi);
    const sl::SamplingDomain d{1, 1, 0.0, 2 * kPi, 4.0, 3.0};
    sl::CheckOptions opts;
    opts.n_samples = 20000;
    opts.seed = static_cast<std::uint64_t>(k + 1);
    opts.refine_budget = 0;
    const auto dis = sl::check_disp_lyap(sl::testing::half_square_v(), sys, sl::DecayRate::constant(1.0), mu, omega,
                                         sl::DisForm::State, d, opts);
    if (!dis.pass) continue;
    ++dis_pass;
    const auto chi = sl::dis_to_issp_chi(mu, omega);
    const auto rate_mu = (1.0 / (2.0 * pe.pbar)) * mu;
    const auto iss = sl::check_issp_lyap(sl::testing::half_square_v(), sys, p, rate_mu, chi, d, opts);
    worst = std::min(worst, iss.worst_margin);
    if (iss.pass) ++iss_pass;
  }
  return {dis_pass == kImplicationSystems && iss_pass == dis_pass,
          fmt::format("{}/{} systems pass the strict DIS check; {}/{} of those pass ISS(p) with chi = mu^-1(2 Omega) "
                      "and rate p/(2 pbar) mu; worst ISS margin {:.3g}",
                      dis_pass, kImplicationSystems, iss_pass, dis_pass, worst)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 xi closed form on the rigid-body rate", xi_closed_form},
      {"2 PE constants of the rigid-body rate", pe_values},
      {"3 rigid-body strict-DIS contract", dis_contract},
      {"4 bounds and slope invariants on issued certificates", certificate_invariants},
      {"5 xi range and p_ growth on random periodic rates", pe_window_suite},
      {"6 V# decay along closed-loop simulations", simulation_decay},
      {"7 strict ISS without DIS for a growing input gain", growing_gain_separation},
      {"8 derivative cross-checks", derivative_crosscheck},
      {"9 RK4 convergence order", integrator_order},
      {"10 strict DIS implies ISS(p)", dis_to_iss_implication},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("[%s] %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
