#include "strictlyap/cli/problem.hpp"

#include <algorithm>

#include "strictlyap/error.hpp"
#include "strictlyap/expr.hpp"

namespace strictlyap::cli {

const DecayRate& Problem::rate() const {
  if (!p) throw Error(ErrorKind::Config, "[rate] p is required for this command");
  return *p;
}

double Problem::window() const {
  if (!tau) throw Error(ErrorKind::Config, "[rate] tau is required for this command");
  return *tau;
}

const GainFunction& Problem::gain(const std::optional<GainFunction>& g, const char* key) const {
  if (!g) throw Error(ErrorKind::Config, std::string("[gains] ") + key + " is required for this command");
  return *g;
}

namespace {

std::optional<GainFunction> parse_gain(const ProblemConfig& cfg, const char* key) {
  auto text = cfg.gain(key);
  if (!text) return std::nullopt;
  return GainFunction::parse(*text);
}

Extension parse_extension(const std::string& text) {
  if (text == "natural") return Extension::Natural;
  if (text == "hold") return Extension::Hold;
  if (text == "periodic") return Extension::Periodic;
  throw Error(ErrorKind::Config, "[rate] extension: expected natural, hold or periodic, got '" + text + "'");
}

Signal parse_signal(const ProblemConfig& cfg, int m) {
  if (!cfg.u || cfg.u->empty()) return Signal::zero(m);
  std::vector<std::vector<expr::Expr>> pieces;
  for (const auto& piece : split_top_level(*cfg.u, '|')) {
    std::vector<expr::Expr> comps;
    for (const auto& c : split_top_level(piece, ',')) comps.push_back(expr::parse(c));
    if (static_cast<int>(comps.size()) != m) {
      throw Error(ErrorKind::Config, "[sim] u: piece '" + piece + "' needs " + std::to_string(m) + " components");
    }
    pieces.push_back(std::move(comps));
  }
  return Signal::from_exprs(m, std::move(pieces), cfg.u_breaks);
}

}  // namespace

Problem build_problem(const ProblemConfig& cfg) {
  std::vector<expr::Expr> f;
  for (const auto& text : cfg.f) f.push_back(expr::parse(text));
  ControlSystem open = ControlSystem::from_exprs(std::move(f), cfg.m, cfg.system_period);
  const int k = static_cast<int>(cfg.feedback.size());
  ControlSystem closed = open;
  if (k > 0) {
    std::vector<expr::Expr> laws;
    for (const auto& text : cfg.feedback) {
      laws.push_back(expr::parse(text));
      if (laws.back().max_index(expr::VarKind::State) > cfg.n) {
        throw Error(ErrorKind::DimensionMismatch, "feedback '" + text + "' uses a state beyond n");
      }
    }
    closed = close_loop(open, feedback_from_exprs(std::move(laws)), k);
  }

  const expr::Expr v_expr = expr::parse(cfg.v);
  if (v_expr.max_index(expr::VarKind::State) > cfg.n) {
    throw Error(ErrorKind::DimensionMismatch, "V uses a state beyond n=" + std::to_string(cfg.n));
  }
  LyapunovCandidate v = LyapunovCandidate::from_expr(v_expr, cfg.n, GainFunction::parse(cfg.alpha1),
                                                     GainFunction::parse(cfg.alpha2), GainFunction::parse(cfg.alpha3),
                                                     cfg.lyapunov_period);

  std::optional<DecayRate> p;
  if (cfg.p) {
    std::optional<Extension> ext;
    if (cfg.extension) ext = parse_extension(*cfg.extension);
    p = DecayRate::parse(*cfg.p, cfg.rate_period, ext);
  }

  SamplingDomain domain;
  if (p && cfg.tau) {
    domain = default_domain(closed, *p, *cfg.tau);
  } else {
    domain.n = closed.n();
    domain.m = closed.m();
    domain.u_max = closed.m() > 0 ? domain.u_max : 0.0;
  }
  if (cfg.t_min) domain.t_min = *cfg.t_min;
  if (cfg.t_max) domain.t_max = *cfg.t_max;
  if (cfg.x_max) domain.x_max = *cfg.x_max;
  if (cfg.u_max) domain.u_max = *cfg.u_max;
  if (!(domain.t_max > domain.t_min) || domain.x_max < 0.0 || domain.u_max < 0.0) {
    throw Error(ErrorKind::Config, "[domain] needs t_max > t_min and non-negative radii");
  }

  CheckOptions check;
  check.seed = cfg.seed;
  if (cfg.samples) check.n_samples = *cfg.samples;

  Signal signal = parse_signal(cfg, closed.m());

  return Problem{cfg,
                 std::move(closed),
                 std::move(v),
                 std::move(p),
                 cfg.tau,
                 parse_gain(cfg, "mu"),
                 parse_gain(cfg, "mu_tilde"),
                 parse_gain(cfg, "omega"),
                 parse_gain(cfg, "chi"),
                 domain,
                 check,
                 std::move(signal)};
}

StrictCertificate build_certificate(const Problem& pr, std::optional<OmegaEnvelope>* envelope) {
  const DecayRate& p = pr.rate();
  const PeEstimate pe = estimate_pe(p, pr.window(), pr.config.horizon);
  switch (pr.config.mode) {
    case Mode::Issp:
      return strictify_issp(pr.v, pr.system, p, pe, pr.gain(pr.chi, "chi"), pr.gain(pr.mu, "mu"), pr.domain,
                            pr.check);
    case Mode::DispValue:
      return strictify_disp(pr.v, pr.system, p, pe, pr.gain(pr.mu_tilde, "mu_tilde"), pr.gain(pr.omega, "omega"),
                            pr.config.factor.value_or(kStepFactor), pr.domain, pr.check);
    case Mode::DispState: {
      std::optional<GainFunction> omega = pr.omega;
      if (!omega) {
        OmegaOptions oo;
        oo.t_max = pr.config.omega_t_max.value_or(pr.domain.t_max);
        oo.s_max = pr.config.omega_s_max.value_or(std::max(pr.domain.u_max, 1.0));
        oo.seed = pr.check.seed;
        OmegaEnvelope env = construct_omega(pr.system, pr.v, pr.gain(pr.mu, "mu"), pr.gain(pr.chi, "chi"), oo);
        omega = env.omega;
        if (envelope) *envelope = std::move(env);
      }
      return strictify_disp_state(pr.v, pr.system, p, pe, pr.gain(pr.mu, "mu"), *omega, pr.domain, pr.check);
    }
  }
  throw Error(ErrorKind::Config, "unknown strictify mode");
}

}  // namespace strictlyap::cli
