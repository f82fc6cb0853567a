#include "strictlyap/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "strictlyap/cli/fixtures.hpp"
#include "strictlyap/cli/problem.hpp"
#include "strictlyap/cli/report.hpp"
#include "strictlyap/decay.hpp"
#include "strictlyap/expr.hpp"
#include "strictlyap/strictify.hpp"
#include "strictlyap/verify.hpp"

namespace strictlyap::cli {

int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Syntax:
    case ErrorKind::UnknownIdentifier:
    case ErrorKind::Arity:
    case ErrorKind::Config:
    case ErrorKind::UnknownCheck:
    case ErrorKind::DimensionMismatch:
      return kConfigError;
    default:
      return kValidationFailure;
  }
}

ProblemConfig fixture_config(const std::string& name) {
  auto text = fixture_text(name);
  if (!text) {
    std::string known;
    for (const auto& n : fixture_names()) known += (known.empty() ? "" : ", ") + n;
    throw Error(ErrorKind::Config, "unknown fixture '" + name + "' (known: " + known + ")");
  }
  return parse_config_text(*text, name);
}

namespace {

constexpr double kExpectTolerance = 1e-6;
constexpr std::size_t kXiPoints = 100;

void apply(ProblemConfig& cfg, const RunOptions& opts) {
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.samples) cfg.samples = *opts.samples;
}

void write_file(const RunOptions& opts, const std::string& name, const std::function<void(std::ostream&)>& body) {
  const std::filesystem::path dir(opts.out_dir);
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw Error(ErrorKind::Config, "cannot write " + (dir / name).string());
  body(out);
}

std::optional<double> linear_slope(const GainFunction& w) {
  const double c = w(1.0);
  for (double s : {0.25, 2.0, 10.0, 100.0}) {
    if (std::abs(w(s) - c * s) > 1e-12 * std::max(1.0, std::abs(c * s))) return std::nullopt;
  }
  return c;
}

double eval_t(const expr::Expr& e, double t) {
  expr::Bindings b;
  b.t = t;
  return e.eval(b);
}

expr::Expr parse_time_expr(const std::string& text, const std::string& where) {
  expr::Expr e = expr::parse(text);
  if (e.depends_on(expr::VarKind::State) || e.depends_on(expr::VarKind::Input) || e.depends_on(expr::VarKind::Arg)) {
    throw Error(ErrorKind::Config, where + ": '" + text + "' may only use t");
  }
  return e;
}

void describe_certificate(const StrictCertificate& cert, const Problem& pr, Report& r) {
  r.section("certificate");
  r.add("kind", to_string(cert.kind));
  r.add("system", pr.system.label());
  r.add("V", pr.v.label);
  r.add("p", pr.rate().label());
  r.add("tau", cert.pe.tau);
  r.add("epsilon_certified", cert.pe.epsilon);
  r.add("pbar_certified", cert.pe.pbar);
  r.add("factor", cert.factor);
  if (cert.alpha2_tilde) r.add("alpha2_tilde", cert.alpha2_tilde->label());
  r.add("w", cert.w.label());
  if (auto c = linear_slope(cert.w)) {
    r.add("vsharp", fmt::format("(1 + {} * xi(t)) * V(t, x)", *c));
  } else {
    r.add("vsharp", "V(t, x) + xi(t) * w(V(t, x))");
  }
  r.add("decay", cert.decay.label());
  r.add("gain_margin", cert.gain_margin);
  if (cert.chi) r.add("chi", cert.chi->label());
  if (cert.omega) r.add("omega", cert.omega->label());
  if (cert.iss_chi) r.add("iss_chi", cert.iss_chi->label());
  if (cert.iss_decay) r.add("iss_decay", cert.iss_decay->label());
  r.add("domain", cert.domain.to_string());
  r.add("valid", cert.valid());
  for (const auto& rep : cert.validation) r.add_check(rep);
}

struct Run {
  std::string name;
  Trajectory traj;
};

std::vector<Run> simulate_runs(const Problem& pr) {
  const auto& cfg = pr.config;
  if (cfg.x0.empty()) throw Error(ErrorKind::Config, "[sim] x0 is required for this command");
  std::vector<Run> runs;
  const Signal zero = Signal::zero(pr.system.m());
  for (std::size_t k = 0; k < cfg.x0.size(); ++k) {
    runs.push_back({fmt::format("{}_zero", k + 1), integrate(pr.system, cfg.x0[k], cfg.t0, cfg.tf, zero, cfg.step)});
    if (!pr.signal.is_zero()) {
      runs.push_back(
          {fmt::format("{}_input", k + 1), integrate(pr.system, cfg.x0[k], cfg.t0, cfg.tf, pr.signal, cfg.step)});
    }
  }
  return runs;
}

int verify_one(const Problem& pr, const std::string& check, const RunOptions& opts, Report& r) {
  std::vector<InequalityReport> reports;
  if (check == "uppd") {
    if (pr.config.verify_sharp) {
      reports.push_back(check_uppd(build_certificate(pr).as_candidate(), pr.domain, pr.check));
    } else {
      reports.push_back(check_uppd(pr.v, pr.domain, pr.check));
    }
  } else if (check == "issp-lyap") {
    reports.push_back(check_issp_lyap(pr.v, pr.system, pr.rate(), pr.gain(pr.mu, "mu"), pr.gain(pr.chi, "chi"),
                                      pr.domain, pr.check));
  } else if (check == "disp-lyap") {
    const bool value_form = pr.config.mode == Mode::DispValue;
    const GainFunction& term = value_form ? pr.gain(pr.mu_tilde, "mu_tilde") : pr.gain(pr.mu, "mu");
    std::optional<GainFunction> omega = pr.omega;
    if (!omega) {
      OmegaOptions oo;
      oo.t_max = pr.config.omega_t_max.value_or(pr.domain.t_max);
      oo.s_max = pr.config.omega_s_max.value_or(std::max(pr.domain.u_max, 1.0));
      oo.seed = pr.check.seed;
      omega = construct_omega(pr.system, pr.v, pr.gain(pr.mu, "mu"), pr.gain(pr.chi, "chi"), oo).omega;
    }
    reports.push_back(check_disp_lyap(pr.v, pr.system, pr.rate(), term, *omega,
                                      value_form ? DisForm::Value : DisForm::State, pr.domain, pr.check));
  } else if (check == "strict-iss-lyap") {
    if (pr.config.verify_sharp) {
      const StrictCertificate cert = build_certificate(pr);
      const GainFunction& chi = cert.iss_chi ? *cert.iss_chi : *cert.chi;
      const GainFunction& decay = cert.iss_decay ? *cert.iss_decay : cert.decay;
      r.section("strict-iss-lyap target");
      r.add("V", "V# (" + to_string(cert.kind) + " certificate)");
      r.add("mu", decay.label());
      r.add("chi", chi.label());
      reports.push_back(check_strict_iss_lyap(cert.as_candidate(), pr.system, decay, chi, pr.domain, pr.check));
    } else {
      reports.push_back(
          check_strict_iss_lyap(pr.v, pr.system, pr.gain(pr.mu, "mu"), pr.gain(pr.chi, "chi"), pr.domain, pr.check));
    }
  } else if (check == "iss-estimate") {
    const DecayRate p = pr.p ? *pr.p : DecayRate::constant(1.0);
    std::vector<Trajectory> batch;
    for (auto& run : simulate_runs(pr)) batch.push_back(std::move(run.traj));
    const IssEnvelope env = fit_iss_envelope(batch, p);
    r.section("iss envelope");
    r.add("beta", env.beta.label());
    r.add("gamma", env.gamma.label());
    r.add("gain_c", env.gain_c);
    r.add("rate_lambda", env.rate_lambda);
    r.add("runs", batch.size());
    reports.push_back(env.heldout);
  } else {
    throw Error(ErrorKind::UnknownCheck,
                "'" + check + "' (expected uppd, issp-lyap, disp-lyap, strict-iss-lyap or iss-estimate)");
  }
  bool pass = true;
  for (const auto& rep : reports) {
    r.add_check(rep);
    pass = pass && rep.pass;
  }
  write_file(opts, "verify_" + check + ".csv", [&](std::ostream& os) { write_checks_csv(os, reports); });
  return pass ? kPass : kValidationFailure;
}

// Admissibility of an alternate rigid-body reference: bounded int w1r w2r and PE of w1r^2 + w2r^2.
void check_admissibility(const std::string& reference, double tau, Report& r) {
  const auto parts = split_top_level(reference, ',');
  if (parts.size() != 3) throw Error(ErrorKind::Config, "--reference needs three expressions 'w1r, w2r, w3r'");
  const expr::Expr w1 = parse_time_expr(parts[0], "--reference");
  const expr::Expr w2 = parse_time_expr(parts[1], "--reference");
  parse_time_expr(parts[2], "--reference");

  const double horizon = 40.0 * std::numbers::pi;
  const double h = 0.01;
  const std::size_t n = static_cast<std::size_t>(std::llround(horizon / h));
  auto prod = [&](double t) { return eval_t(w1, t) * eval_t(w2, t); };
  double integral = 0.0;
  double sup_half = 0.0;
  double sup_full = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double a = h * static_cast<double>(k);
    integral += h / 6.0 * (prod(a) + 4.0 * prod(a + h / 2) + prod(a + h));
    sup_full = std::max(sup_full, std::abs(integral));
    if (k < n / 2) sup_half = sup_full;
  }
  r.section("admissibility");
  r.add("reference", reference);
  r.add("sup_integral_w1r_w2r_half_horizon", sup_half);
  r.add("sup_integral_w1r_w2r", sup_full);
  r.add("horizon", horizon);
  if (sup_full > 1.5 * sup_half + 1e-6) {
    throw Error(ErrorKind::AdmissibilityFailed,
                fmt::format("sup_t |int_0^t w1r w2r| is unbounded: {} on [0, {}] vs {} on [0, {}]", sup_full, horizon,
                            sup_half, horizon / 2));
  }

  const DecayRate q([w1, w2](double t) { return std::pow(eval_t(w1, t), 2) + std::pow(eval_t(w2, t), 2); },
                    "(" + w1.to_string() + ")^2 + (" + w2.to_string() + ")^2");
  std::optional<PeEstimate> est;
  std::vector<double> taus{tau};
  for (int k = 1; k <= 8; ++k) taus.push_back(tau * k / 2.0);
  for (double candidate : taus) {
    try {
      est = estimate_pe(q, candidate, horizon);
      break;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NotPersistentlyExciting) throw;
    }
  }
  if (!est) {
    throw Error(ErrorKind::AdmissibilityFailed,
                fmt::format("w1r^2 + w2r^2 = {} is not persistently exciting for tau up to {}", q.label(), 4 * tau));
  }
  r.add("pe_rate", q.label());
  r.add("pe_tau", est->tau);
  r.add("pe_epsilon", est->epsilon);
  r.add("admissible", true);
}

bool is_default_reference(const std::string& reference) {
  const auto parts = split_top_level(reference, ',');
  const auto defaults = split_top_level(kDefaultReference, ',');
  if (parts.size() != defaults.size()) return false;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (expr::parse(parts[i]).to_string() != expr::parse(defaults[i]).to_string()) return false;
  }
  return true;
}

}  // namespace

int cmd_pe(ProblemConfig cfg, const RunOptions& opts, std::ostream& out) {
  apply(cfg, opts);
  const Problem pr = build_problem(cfg);
  const DecayRate& p = pr.rate();
  const PeEstimate est = estimate_pe(p, pr.window(), cfg.horizon);
  Report r;
  r.section("pe");
  r.add("p", p.label());
  r.add("tau", est.tau);
  r.add("epsilon", est.epsilon);
  r.add("pbar", est.pbar);
  r.add("epsilon_certified", est.epsilon_certified);
  r.add("pbar_certified", est.pbar_certified);
  r.add("horizon", est.horizon);
  r.add("argmin_t", est.argmin_t);
  r.add("argmax_t", est.argmax_t);
  r.add("horizon_limited", est.horizon_limited);
  r.write(out);
  write_file(opts, "pe_window.csv", [&](std::ostream& os) {
    os << "t,window\n";
    const std::size_t n = 1000;
    for (std::size_t k = 0; k <= n; ++k) {
      const double t = est.horizon * static_cast<double>(k) / static_cast<double>(n);
      fmt::print(os, "{},{}\n", t, window_integral(p, t - est.tau, t));
    }
  });
  return kPass;
}

int cmd_strictify(ProblemConfig cfg, const RunOptions& opts, std::ostream& out) {
  apply(cfg, opts);
  const Problem pr = build_problem(cfg);
  std::optional<OmegaEnvelope> env;
  const StrictCertificate cert = build_certificate(pr, &env);
  Report r;
  describe_certificate(cert, pr, r);
  if (env) {
    r.section("omega envelope");
    r.add("grid_points", env->s_grid.size());
    r.add("s_min", env->s_grid.front());
    r.add("s_max", env->s_grid.back());
    r.add("sup_at_s_max", env->sup.back());
  }

  const DecayRate& p = pr.rate();
  const double tau = cert.pe.tau;
  const double span = 4.0 * p.period().value_or(tau);
  std::vector<double> ts(kXiPoints), xs(kXiPoints);
  for (std::size_t k = 0; k < kXiPoints; ++k) {
    ts[k] = span * static_cast<double>(k) / static_cast<double>(kXiPoints - 1);
    xs[k] = xi(p, tau, ts[k]);
  }
  const auto slope = linear_slope(cert.w);
  write_file(opts, "xi.csv", [&](std::ostream& os) {
    os << "t,xi,xi_rate" << (slope ? ",vsharp_coefficient" : "") << '\n';
    for (std::size_t k = 0; k < kXiPoints; ++k) {
      fmt::print(os, "{},{},{}", ts[k], xs[k], cert.xi.rate(ts[k]));
      if (slope) fmt::print(os, ",{}", 1.0 + *slope * xs[k]);
      os << '\n';
    }
  });

  bool pass = cert.valid();
  r.section("xi");
  r.add("points", kXiPoints);
  r.add("t_range", fmt::format("[0, {}]", span));
  bool constant = true;
  const double p0 = p(0.0);
  for (std::size_t k = 0; k < 64 && constant; ++k) constant = p(span * static_cast<double>(k) / 63.0) == p0;
  if (constant) {
    const double closed = p0 * tau * tau / 2.0;
    double err = 0.0;
    for (double x : xs) err = std::max(err, std::abs(x - closed));
    r.add("constant_rate", true);
    r.add("xi_constant", closed);
    r.add("xi_constant_max_error", err);
    pass = pass && err <= kExpectTolerance;
  }
  auto expect = [&](const std::optional<std::string>& text, const char* key, auto&& computed) {
    if (!text) return;
    const expr::Expr e = parse_time_expr(*text, std::string("[expect] ") + key);
    double err = 0.0;
    for (std::size_t k = 0; k < kXiPoints; ++k) err = std::max(err, std::abs(computed(k) - eval_t(e, ts[k])));
    const bool ok = err <= kExpectTolerance;
    r.section(std::string("expect ") + key);
    r.add("formula", e.to_string());
    r.add("max_abs_error", err);
    r.add("tolerance", kExpectTolerance);
    r.add("pass", ok);
    pass = pass && ok;
  };
  expect(cfg.expect_xi, "xi", [&](std::size_t k) { return xs[k]; });
  if (cfg.expect_vsharp_coefficient) {
    if (!slope) throw Error(ErrorKind::Config, "[expect] vsharp_coefficient needs a linear w");
    expect(cfg.expect_vsharp_coefficient, "vsharp_coefficient", [&](std::size_t k) { return 1.0 + *slope * xs[k]; });
  }
  r.write(out);
  return pass ? kPass : kValidationFailure;
}

int cmd_verify(ProblemConfig cfg, const std::string& check, const RunOptions& opts, std::ostream& out) {
  apply(cfg, opts);
  const Problem pr = build_problem(cfg);
  Report r;
  const int code = verify_one(pr, check, opts, r);
  r.write(out);
  return code;
}

int cmd_simulate(ProblemConfig cfg, const RunOptions& opts, std::ostream& out) {
  apply(cfg, opts);
  const Problem pr = build_problem(cfg);
  Report r;
  std::optional<StrictCertificate> cert;
  try {
    cert = build_certificate(pr);
  } catch (const Error& e) {
    r.section("certificate");
    r.add("available", false);
    r.add("reason", e.what());
  }
  for (const auto& run : simulate_runs(pr)) {
    const auto& traj = run.traj;
    std::vector<std::pair<std::string, std::vector<double>>> extra;
    std::vector<double> vcol, vsharp;
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
      vcol.push_back(pr.v(traj.times[k], traj.states[k]));
      if (cert) vsharp.push_back(cert->v_sharp(traj.times[k], traj.states[k]));
    }
    double max_norm = 0.0;
    for (const auto& x : traj.states) max_norm = std::max(max_norm, norm(x));
    r.section("run " + run.name);
    r.add("x0", format_point(Sample{traj.times.front(), traj.states.front(), {}}));
    r.add("input", traj.input_used.is_zero() ? std::string("0") : traj.input_used.to_string());
    r.add("steps", traj.times.size() - 1);
    r.add("final_norm", norm(traj.states.back()));
    r.add("max_norm", max_norm);
    r.add("V_final", vcol.back());
    extra.emplace_back("V", std::move(vcol));
    if (cert) {
      double max_increase = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 1; k < vsharp.size(); ++k) max_increase = std::max(max_increase, vsharp[k] - vsharp[k - 1]);
      r.add("Vsharp_final", vsharp.back());
      r.add("Vsharp_max_step_increase", max_increase);
      extra.emplace_back("Vsharp", std::move(vsharp));
    }
    write_file(opts, "traj_" + run.name + ".csv", [&](std::ostream& os) { write_trajectory_csv(os, traj, extra); });
  }
  r.write(out);
  return kPass;
}

int cmd_example(const std::string& name, const RunOptions& opts, std::ostream& out) {
  ProblemConfig cfg = fixture_config(name);
  apply(cfg, opts);
  int code = kPass;
  auto step = [&](const std::string& title, const std::function<int()>& body) {
    out << "== " << title << " ==\n";
    code = std::max(code, body());
    out << '\n';
  };

  if (name == "rigid-body") {
    const std::string reference = opts.reference.value_or(std::string(kDefaultReference));
    Report r;
    check_admissibility(reference, cfg.tau.value_or(std::numbers::pi), r);
    r.write(out);
    out << '\n';
    if (!is_default_reference(reference)) {
      out << "note: the closed-loop fixture is defined for the default reference " << kDefaultReference << "\n";
      return kPass;
    }
    step("pe", [&] { return cmd_pe(cfg, opts, out); });
    step("strictify", [&] { return cmd_strictify(cfg, opts, out); });
    step("verify disp-lyap", [&] { return cmd_verify(cfg, "disp-lyap", opts, out); });
    step("verify strict-iss-lyap", [&] { return cmd_verify(cfg, "strict-iss-lyap", opts, out); });
    step("simulate", [&] { return cmd_simulate(cfg, opts, out); });
    return code;
  }

  if (name == "counterexample-elw") {
    step("verify strict-iss-lyap", [&] { return cmd_verify(cfg, "strict-iss-lyap", opts, out); });
    const Problem pr = build_problem(cfg);
    Report r;
    r.section("dissipation probe");
    const Vec x{1.0};
    const Vec u{2.0};
    const double v0 = pr.v.vdot(pr.system, 0.0, x, u);
    const double v10 = pr.v.vdot(pr.system, 10.0, x, u);
    r.add("vdot_t0_x1_u2", v0);
    r.add("vdot_t10_x1_u2", v10);
    r.add("difference", v10 - v0);
    SamplingDomain d10 = pr.domain;
    d10.t_min = 0.0;
    d10.t_max = 10.0;
    SamplingDomain d100 = d10;
    d100.t_max = 100.0;
    const GainFunction omega = GainFunction::parse("s^2");
    const DecayRate one = DecayRate::constant(1.0);
    const auto m10 = check_disp_lyap(pr.v, pr.system, one, pr.gain(pr.mu, "mu"), omega, DisForm::State, d10, pr.check);
    const auto m100 =
        check_disp_lyap(pr.v, pr.system, one, pr.gain(pr.mu, "mu"), omega, DisForm::State, d100, pr.check);
    r.add("omega_probe", omega.label());
    r.add("dis_margin_t10", m10.worst_margin);
    r.add("dis_margin_t100", m100.worst_margin);
    const bool separated = m100.worst_margin <= m10.worst_margin - 100.0;
    r.add("separated", separated);
    r.write(out);
    out << '\n';
    if (!separated) code = std::max(code, static_cast<int>(kValidationFailure));
    out << "== strictify ==\n";
    try {
      cmd_strictify(cfg, opts, out);
      out << "unexpected: certificate issued\n";
      code = std::max(code, static_cast<int>(kValidationFailure));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::UnboundedSup) throw;
      Report diag;
      diag.section("diagnosis");
      diag.add("error", e.what());
      diag.add("expected", true);
      diag.write(out);
    }
    return code;
  }

  step("pe", [&] { return cmd_pe(cfg, opts, out); });
  step("strictify", [&] { return cmd_strictify(cfg, opts, out); });
  step("verify issp-lyap", [&] { return cmd_verify(cfg, "issp-lyap", opts, out); });
  step("verify iss-estimate", [&] { return cmd_verify(cfg, "iss-estimate", opts, out); });
  step("simulate", [&] { return cmd_simulate(cfg, opts, out); });
  return code;
}

}  // namespace strictlyap::cli
