#include "strictlyap/strictify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include <fmt/format.h>

#include "strictlyap/error.hpp"

namespace strictlyap {

GainFunction build_alpha2_tilde(const GainFunction& alpha2, const GainFunction& mu, double tau, double pbar) {
  if (!(tau > 0.0) || !(pbar > 0.0)) throw Error(ErrorKind::Config, "tau and pbar must be positive");
  const double c = std::max(tau * pbar / 2.0, 1.0);
  return (c * (alpha2 + mu + GainFunction::identity()))
      .with_label(fmt::format("{} * ({} + {} + s)", c, alpha2.label(), mu.label()));
}

GainFunction build_w(const GainFunction& mu_tilde, double tau, double pbar, double factor) {
  if (!(tau > 0.0) || !(pbar > 0.0)) throw Error(ErrorKind::Config, "tau and pbar must be positive");
  if (!(factor > 0.0) || factor > kStepFactor) {
    throw Error(ErrorKind::Config, fmt::format("factor {} outside (0, 1/4]", factor));
  }
  const GainFunction w =
      ((factor / tau) * mu_tilde).with_label(fmt::format("({} / {}) * ({})", factor, tau, mu_tilde.label()));
  const double bound = 1.0 / (2.0 * tau * tau * pbar);
  const double tol = 1e-9 * bound;
  // Linear grid over the probe range plus a log grid near 0.
  const double top = w.probe_max();
  const std::size_t n = 2000;
  auto probe = [&](double s) {
    const double d = w.derivative(s);
    if (!(d <= bound + tol) || d < -tol) {
      throw Error(ErrorKind::SlopeBoundViolated,
                  fmt::format("w'({}) = {} but the bound is [0, 1/(2 tau^2 pbar)] = [0, {}]", s, d, bound));
    }
  };
  for (std::size_t i = 0; i <= n; ++i) probe(top * static_cast<double>(i) / static_cast<double>(n));
  for (int k = -12; k <= 0; ++k) probe(std::pow(10.0, k) * std::min(top, 1.0));
  return w;
}

GainFunction dis_to_issp_chi(const GainFunction& mu, const GainFunction& omega) {
  return compose(inverse(mu), 2.0 * omega).with_label(fmt::format("inv({})(2 * ({}))", mu.label(), omega.label()));
}

std::string to_string(CertificateKind kind) {
  return kind == CertificateKind::StrictIss ? "strict-ISS" : "strict-DIS";
}

double StrictCertificate::v_sharp(double t, std::span<const double> x) const {
  const double v = base(t, x);
  return v + xi.value(t) * w(v);
}

double StrictCertificate::scale(double t, std::span<const double> x) const {
  return 1.0 + xi.value(t) * w.derivative(base(t, x));
}

double StrictCertificate::vdot_sharp(double t, std::span<const double> x, std::span<const double> u) const {
  const double v = base(t, x);
  return (1.0 + xi.value(t) * w.derivative(v)) * base.vdot(system, t, x, u) + xi.rate(t) * w(v);
}

LyapunovCandidate StrictCertificate::as_candidate() const {
  auto self = std::make_shared<const StrictCertificate>(*this);
  LyapunovCandidate out{
      [self](double t, std::span<const double> x) { return self->v_sharp(t, x); },
      [self](double t, std::span<const double> x) {
        const double v = self->base(t, x);
        return self->scale(t, x) * self->base.dv_dt(t, x) + self->xi.rate(t) * self->w(v);
      },
      [self](double t, std::span<const double> x) {
        Vec g = self->base.grad_x(t, x);
        const double c = self->scale(t, x);
        for (double& e : g) e *= c;
        return g;
      },
      base.alpha1,
      base.alpha2 + (pe.tau * pe.tau * pe.pbar / 2.0) * compose(w, base.alpha2),
      1.25 * base.alpha3 + (pe.tau * pe.pbar) * compose(w, base.alpha2),
      xi.rate_function().period() && base.period ? base.period : std::nullopt,
      "V# of " + base.label,
  };
  return out;
}

bool StrictCertificate::valid() const {
  return std::all_of(validation.begin(), validation.end(), [](const auto& r) { return r.pass; });
}

SamplingDomain default_domain(const ControlSystem& sys, const DecayRate& p, double tau) {
  SamplingDomain d;
  d.n = sys.n();
  d.m = sys.m();
  d.t_min = 0.0;
  d.t_max = std::max(p.period().value_or(tau), tau) + tau;
  d.x_max = 10.0;
  d.u_max = sys.m() > 0 ? 5.0 : 0.0;
  return d;
}

namespace {

std::string describe(const InequalityReport& r) {
  std::string pt = fmt::format("t={}", r.worst_point.t);
  for (std::size_t i = 0; i < r.worst_point.x.size(); ++i) pt += fmt::format(", x{}={}", i + 1, r.worst_point.x[i]);
  for (std::size_t i = 0; i < r.worst_point.u.size(); ++i) pt += fmt::format(", u{}={}", i + 1, r.worst_point.u[i]);
  return fmt::format("{} failed: worst margin {} at ({}) over {}", r.name, r.worst_margin, pt, r.domain);
}

void require(const InequalityReport& r) {
  if (!r.pass) throw Error(ErrorKind::ValidationFailed, describe(r));
}

PeTriple certified(const PeEstimate& pe) {
  const PeTriple c = pe.certified();
  if (!(c.tau > 0.0) || !(c.epsilon > 0.0) || !(c.pbar > 0.0)) {
    throw Error(ErrorKind::NotPersistentlyExciting, "certificate needs tau, epsilon, pbar > 0");
  }
  return c;
}

// Bounds and contract checks shared by every route.
void validate(StrictCertificate& cert, const CheckOptions& opts) {
  const auto samples = generate_samples(cert.domain, opts.n_samples, opts.seed);
  CheckOptions no_refine = opts;
  no_refine.refine_budget = 0;

  Margin bounds = [&cert](const Sample& s) -> std::optional<double> {
    const double c = cert.scale(s.t, s.x);
    return std::min(c - 1.0, 1.25 - c);
  };
  cert.validation.push_back(evaluate_margin("bounds", bounds, samples, cert.domain, no_refine));

  Margin contract;
  if (cert.kind == CertificateKind::StrictIss) {
    contract = [&cert](const Sample& s) -> std::optional<double> {
      const double r = norm(s.x);
      if (r < (*cert.chi)(norm(s.u))) return std::nullopt;
      return -cert.vdot_sharp(s.t, s.x, s.u) - cert.decay(r);
    };
  } else {
    contract = [&cert](const Sample& s) -> std::optional<double> {
      return -cert.vdot_sharp(s.t, s.x, s.u) - cert.decay(norm(s.x)) + cert.gain_margin * (*cert.omega)(norm(s.u));
    };
  }
  auto rep = evaluate_margin(to_string(cert.kind) + " contract", contract, samples, cert.domain, opts);
  rep.horizon_limited = !cert.xi.rate_function().period().has_value();
  cert.validation.push_back(std::move(rep));
  for (const auto& r : cert.validation) require(r);
}

StrictCertificate assemble(CertificateKind kind, const LyapunovCandidate& v, const ControlSystem& sys,
                           const DecayRate& p, const PeTriple& pe, double factor, GainFunction w,
                           std::optional<GainFunction> alpha2_tilde, const SamplingDomain& domain) {
  const double eps = pe.epsilon;
  GainFunction decay = (eps * compose(w, v.alpha1)).with_label(fmt::format("{} * w({})", eps, v.alpha1.label()));
  return StrictCertificate{
      kind,  v, sys, XiFunction(p, pe.tau), pe, factor, std::move(w), std::move(alpha2_tilde), std::move(decay),
      1.0,   {}, {}, {},  {},                domain, {},
  };
}

}  // namespace

StrictCertificate strictify_issp(const LyapunovCandidate& v, const ControlSystem& sys, const DecayRate& p,
                                 const PeEstimate& pe_est, const GainFunction& chi, const GainFunction& mu,
                                 const SamplingDomain& domain, const CheckOptions& opts) {
  const PeTriple pe = certified(pe_est);
  require(check_uppd(v, domain, opts));
  require(check_issp_lyap(v, sys, p, mu, chi, domain, opts));
  GainFunction a2t = build_alpha2_tilde(v.alpha2, mu, pe.tau, pe.pbar);
  GainFunction mu_tilde = compose(mu, inverse(a2t)).with_label(fmt::format("{} o inv(a2~)", mu.label()));
  GainFunction w = build_w(mu_tilde, pe.tau, pe.pbar, kStepFactor);
  StrictCertificate cert =
      assemble(CertificateKind::StrictIss, v, sys, p, pe, kStepFactor, std::move(w), std::move(a2t), domain);
  cert.chi = chi;
  validate(cert, opts);
  return cert;
}

namespace {

StrictCertificate finish_dis(const LyapunovCandidate& v, const ControlSystem& sys, const DecayRate& p,
                             const PeTriple& pe, const GainFunction& omega, double factor, GainFunction w,
                             std::optional<GainFunction> a2t, const SamplingDomain& domain,
                             const CheckOptions& opts) {
  StrictCertificate cert =
      assemble(CertificateKind::StrictDis, v, sys, p, pe, factor, std::move(w), std::move(a2t), domain);
  cert.gain_margin = 1.25;
  cert.omega = omega;
  const GainFunction scaled_omega = (cert.gain_margin * omega).with_label("1.25 * (" + omega.label() + ")");
  cert.iss_chi = dis_to_issp_chi(cert.decay, scaled_omega);
  cert.iss_decay = (0.5 * cert.decay).with_label("0.5 * " + cert.decay.label());
  validate(cert, opts);
  return cert;
}

}  // namespace

StrictCertificate strictify_disp(const LyapunovCandidate& v, const ControlSystem& sys, const DecayRate& p,
                                 const PeEstimate& pe_est, const GainFunction& mu_tilde, const GainFunction& omega,
                                 double factor, const SamplingDomain& domain, const CheckOptions& opts) {
  const PeTriple pe = certified(pe_est);
  GainFunction w = build_w(mu_tilde, pe.tau, pe.pbar, factor);
  require(check_uppd(v, domain, opts));
  require(check_disp_lyap(v, sys, p, mu_tilde, omega, DisForm::Value, domain, opts));
  return finish_dis(v, sys, p, pe, omega, factor, std::move(w), std::nullopt, domain, opts);
}

StrictCertificate strictify_disp_state(const LyapunovCandidate& v, const ControlSystem& sys, const DecayRate& p,
                                       const PeEstimate& pe_est, const GainFunction& mu, const GainFunction& omega,
                                       const SamplingDomain& domain, const CheckOptions& opts) {
  const PeTriple pe = certified(pe_est);
  require(check_uppd(v, domain, opts));
  require(check_disp_lyap(v, sys, p, mu, omega, DisForm::State, domain, opts));
  GainFunction a2t = build_alpha2_tilde(v.alpha2, mu, pe.tau, pe.pbar);
  GainFunction mu_tilde = compose(mu, inverse(a2t)).with_label(fmt::format("{} o inv(a2~)", mu.label()));
  GainFunction w = build_w(mu_tilde, pe.tau, pe.pbar, kStepFactor);
  return finish_dis(v, sys, p, pe, omega, kStepFactor, std::move(w), std::move(a2t), domain, opts);
}

namespace {

std::vector<double> sup_profile(const ControlSystem& sys, const LyapunovCandidate& v, const GainFunction& mu,
                                const std::vector<double>& grid, const std::vector<double>& chi_grid,
                                const std::vector<Sample>& unit, double t_lo, double t_hi) {
  std::vector<double> out(grid.size(), -std::numeric_limits<double>::infinity());
  Vec x(sys.n());
  Vec u(sys.m());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (const auto& s : unit) {
      const double t = t_lo + s.t * (t_hi - t_lo);
      for (int k = 0; k < sys.n(); ++k) x[k] = chi_grid[i] * s.x[k];
      for (int k = 0; k < sys.m(); ++k) u[k] = grid[i] * s.u[k];
      const double val = v.vdot(sys, t, x, u) + mu(norm(x));
      if (!std::isfinite(val)) {
        throw Error(ErrorKind::UnboundedSup, fmt::format("Vdot + mu is not finite at t={}, s={}", t, grid[i]));
      }
      out[i] = std::max(out[i], val);
    }
  }
  return out;
}

}  // namespace

OmegaEnvelope construct_omega(const ControlSystem& sys, const LyapunovCandidate& v, const GainFunction& mu,
                              const GainFunction& chi, const OmegaOptions& opts) {
  if (opts.n_grid < 2 || !(opts.s_min > 0.0) || !(opts.s_max > opts.s_min) || !(opts.t_max > 0.0)) {
    throw Error(ErrorKind::Config, "construct_omega: need n_grid >= 2, 0 < s_min < s_max, t_max > 0");
  }
  std::vector<double> grid(opts.n_grid);
  const double ratio = std::log(opts.s_max / opts.s_min);
  for (std::size_t i = 0; i < opts.n_grid; ++i) {
    grid[i] = opts.s_min * std::exp(ratio * static_cast<double>(i) / static_cast<double>(opts.n_grid - 1));
  }
  std::vector<double> chi_grid(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) chi_grid[i] = chi(grid[i]);

  SamplingDomain unit_domain;
  unit_domain.n = sys.n();
  unit_domain.m = sys.m();
  unit_domain.t_min = 0.0;
  unit_domain.t_max = 1.0;
  unit_domain.x_max = 1.0;
  unit_domain.u_max = 1.0;
  const auto unit = generate_samples(unit_domain, opts.samples_per_s, opts.seed);

  // Sup over [0, T], then over [0, 2T] and [0, 4T] by adding blocks.
  const double T = opts.t_max;
  std::vector<double> m1 = sup_profile(sys, v, mu, grid, chi_grid, unit, 0.0, T);
  auto b2 = sup_profile(sys, v, mu, grid, chi_grid, unit, T, 2 * T);
  auto b3 = sup_profile(sys, v, mu, grid, chi_grid, unit, 2 * T, 3 * T);
  auto b4 = sup_profile(sys, v, mu, grid, chi_grid, unit, 3 * T, 4 * T);
  for (std::size_t i = grid.size(); i-- > 0;) {
    const double m2 = std::max(m1[i], b2[i]);
    const double m4 = std::max({m2, b3[i], b4[i]});
    const double d1 = m2 - m1[i];
    const double d2 = m4 - m2;
    if (d1 >= 0.25 * std::abs(m1[i]) + 1e-9 && d2 >= 1.5 * d1) {
      throw Error(ErrorKind::UnboundedSup,
                  fmt::format("sup of Vdot + mu at s={} grows with the horizon: {} on [0, {}], {} on [0, {}], {} on "
                              "[0, {}]",
                              grid[i], m1[i], T, m2, 2 * T, m4, 4 * T));
    }
  }

  std::vector<double> hull(grid.size());
  double running = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    running = std::max(running, m1[i]);
    hull[i] = running + grid[i];
  }
  const std::size_t last = grid.size() - 1;
  const double tail = (hull[last] - hull[last - 1]) / (grid[last] - grid[last - 1]);
  auto eval = [grid, hull, tail](double s) {
    if (s <= 0.0) return 0.0;
    if (s <= grid.front()) return hull.front() * s / grid.front();
    if (s >= grid.back()) return hull.back() + tail * (s - grid.back());
    auto it = std::upper_bound(grid.begin(), grid.end(), s);
    const std::size_t i = static_cast<std::size_t>(it - grid.begin());
    const double th = (s - grid[i - 1]) / (grid[i] - grid[i - 1]);
    return hull[i - 1] + th * (hull[i] - hull[i - 1]);
  };
  GainFunction omega(eval, nullptr, fmt::format("piecewise-linear envelope on {} points", grid.size()),
                     std::max(kDefaultProbeMax, opts.s_max));
  return OmegaEnvelope{std::move(omega), std::move(grid), std::move(m1)};
}

}  // namespace strictlyap
