#include "strictlyap/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>

#include "strictlyap/error.hpp"

namespace strictlyap {

std::string SamplingDomain::to_string() const {
  return fmt::format("t in [{}, {}], |x| <= {}, |u| <= {} (n={}, m={})", t_min, t_max, x_max, u_max, n, m);
}

namespace {

constexpr int kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53,
                           59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113};

double radical_inverse(std::uint64_t i, int base) {
  double inv = 1.0 / base;
  double f = inv;
  double out = 0.0;
  while (i > 0) {
    out += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return out;
}

// Maps a unit-cube point to the domain: one coordinate for t, then for
// each of x and u a direction from the cube and a radius coordinate.
Sample map_point(const SamplingDomain& d, std::span<const double> c) {
  Sample s;
  s.t = d.t_min + c[0] * (d.t_max - d.t_min);
  std::size_t k = 1;
  auto ball = [&](int dim, double radius) {
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = 2.0 * c[k++] - 1.0;
    const double rho = c[k++];
    const double nv = norm(v);
    if (nv < 1e-12) {
      std::fill(v.begin(), v.end(), 0.0);
      if (dim > 0) v[0] = radius * rho;
      return v;
    }
    for (double& e : v) e *= radius * rho / nv;
    return v;
  };
  s.x = ball(d.n, d.x_max);
  s.u = d.m > 0 ? ball(d.m, d.u_max) : Vec{};
  return s;
}

std::size_t cube_dim(const SamplingDomain& d) { return 1 + (d.n + 1) + (d.m > 0 ? d.m + 1 : 0); }

void project(Sample& s, const SamplingDomain& d) {
  s.t = std::clamp(s.t, d.t_min, d.t_max);
  auto clip = [](Vec& v, double r) {
    const double nv = norm(v);
    if (nv > r && nv > 0.0) {
      for (double& e : v) e *= r / nv;
    }
  };
  clip(s.x, d.x_max);
  clip(s.u, d.u_max);
}

// Coordinate descent on the margin from `start`; returns the best point.
std::pair<Sample, double> descend(const Margin& margin, const SamplingDomain& d, Sample start, double start_margin,
                                  std::size_t budget, std::size_t& evaluations) {
  Sample best = std::move(start);
  double best_m = start_margin;
  const std::size_t n_coords = 1 + best.x.size() + best.u.size();
  auto coord = [&](Sample& s, std::size_t i) -> double& {
    if (i == 0) return s.t;
    if (i <= s.x.size()) return s.x[i - 1];
    return s.u[i - 1 - s.x.size()];
  };
  auto range = [&](std::size_t i) {
    if (i == 0) return d.t_max - d.t_min;
    if (i <= best.x.size()) return d.x_max;
    return d.u_max;
  };
  std::vector<double> step(n_coords);
  for (std::size_t i = 0; i < n_coords; ++i) step[i] = 0.1 * range(i);
  std::size_t used = 0;
  while (used < budget) {
    bool improved = false;
    for (std::size_t i = 0; i < n_coords && used < budget; ++i) {
      if (step[i] <= 0.0) continue;
      for (double dir : {1.0, -1.0}) {
        Sample trial = best;
        coord(trial, i) += dir * step[i];
        project(trial, d);
        ++used;
        ++evaluations;
        auto m = margin(trial);
        if (m && *m < best_m) {
          best = std::move(trial);
          best_m = *m;
          improved = true;
          break;
        }
      }
    }
    if (!improved) {
      bool any = false;
      for (std::size_t i = 0; i < n_coords; ++i) {
        step[i] *= 0.5;
        if (step[i] > 1e-12 * (1.0 + range(i))) any = true;
      }
      if (!any) break;
    }
  }
  return {std::move(best), best_m};
}

}  // namespace

std::vector<Sample> generate_samples(const SamplingDomain& domain, std::size_t n, std::uint64_t seed) {
  const std::size_t dim = cube_dim(domain);
  if (dim > std::size(kPrimes)) throw Error(ErrorKind::Config, "sampling dimension too large");
  std::vector<Sample> out;
  out.reserve(n);
  const std::size_t n_halton = n / 2;
  std::vector<double> c(dim);
  for (std::size_t i = 0; i < n_halton; ++i) {
    for (std::size_t j = 0; j < dim; ++j) c[j] = radical_inverse(i + 1, kPrimes[j]);
    out.push_back(map_point(domain, c));
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t i = n_halton; i < n; ++i) {
    for (std::size_t j = 0; j < dim; ++j) c[j] = unif(rng);
    out.push_back(map_point(domain, c));
  }
  return out;
}

InequalityReport evaluate_margin(std::string name, const Margin& margin, const std::vector<Sample>& samples,
                                 const SamplingDomain& domain, const CheckOptions& opts) {
  InequalityReport rep;
  rep.name = std::move(name);
  rep.tol = opts.tol;
  rep.seed = opts.seed;
  rep.domain = domain.to_string();
  rep.worst_margin = std::numeric_limits<double>::infinity();
  bool found = false;
  for (const auto& s : samples) {
    auto m = margin(s);
    if (!m) continue;
    ++rep.n_samples;
    if (!found || *m < rep.worst_margin || std::isnan(*m)) {
      rep.worst_margin = *m;
      rep.worst_point = s;
      found = true;
      if (std::isnan(*m)) break;
    }
  }
  if (!found) {
    rep.pass = true;
    rep.note = "no sample satisfied the premise";
    return rep;
  }
  if (opts.refine_budget > 0 && std::isfinite(rep.worst_margin)) {
    std::size_t evals = 0;
    auto [pt, m] = descend(margin, domain, rep.worst_point, rep.worst_margin, opts.refine_budget, evals);
    if (m < rep.worst_margin) {
      rep.worst_point = std::move(pt);
      rep.worst_margin = m;
    }
  }
  rep.pass = rep.worst_margin >= -opts.tol;
  return rep;
}

namespace {

void require_dims(const SamplingDomain& d, const ControlSystem& sys) {
  if (d.n != sys.n() || d.m != sys.m()) {
    throw Error(ErrorKind::DimensionMismatch,
                fmt::format("sampling domain is n={}, m={} but the system is n={}, m={}", d.n, d.m, sys.n(), sys.m()));
  }
}

}  // namespace

InequalityReport check_uppd(const LyapunovCandidate& v, const SamplingDomain& domain, const CheckOptions& opts) {
  SamplingDomain d = domain;
  d.m = 0;
  Margin margin = [&v](const Sample& s) -> std::optional<double> {
    const double r = norm(s.x);
    const double val = v(s.t, s.x);
    const double lower = val - v.alpha1(r);
    const double upper = v.alpha2(r) - val;
    const double grad = v.alpha3(r) - v.gradient_norm(s.t, s.x);
    return std::min({lower, upper, grad});
  };
  return evaluate_margin("uppd", margin, generate_samples(d, opts.n_samples, opts.seed), d, opts);
}

InequalityReport check_issp_lyap(const LyapunovCandidate& v, const ControlSystem& sys, const DecayRate& p,
                                 const GainFunction& mu, const GainFunction& chi, const SamplingDomain& domain,
                                 const CheckOptions& opts) {
  require_dims(domain, sys);
  Margin margin = [&](const Sample& s) -> std::optional<double> {
    const double r = norm(s.x);
    if (r < chi(norm(s.u))) return std::nullopt;
    return -v.vdot(sys, s.t, s.x, s.u) - p(s.t) * mu(r);
  };
  auto rep = evaluate_margin("issp-lyap", margin, generate_samples(domain, opts.n_samples, opts.seed), domain, opts);
  rep.horizon_limited = !p.period().has_value();
  return rep;
}

InequalityReport check_disp_lyap(const LyapunovCandidate& v, const ControlSystem& sys, const DecayRate& p,
                                 const GainFunction& term, const GainFunction& omega, DisForm form,
                                 const SamplingDomain& domain, const CheckOptions& opts) {
  require_dims(domain, sys);
  Margin margin = [&](const Sample& s) -> std::optional<double> {
    const double arg = form == DisForm::State ? norm(s.x) : v(s.t, s.x);
    return -v.vdot(sys, s.t, s.x, s.u) - p(s.t) * term(arg) + omega(norm(s.u));
  };
  auto rep = evaluate_margin(form == DisForm::State ? "disp-lyap(state)" : "disp-lyap(value)", margin,
                             generate_samples(domain, opts.n_samples, opts.seed), domain, opts);
  rep.horizon_limited = !p.period().has_value();
  return rep;
}

InequalityReport check_strict_iss_lyap(const LyapunovCandidate& v, const ControlSystem& sys, const GainFunction& mu,
                                       const GainFunction& chi, const SamplingDomain& domain,
                                       const CheckOptions& opts) {
  const DecayRate one = DecayRate::constant(1.0);
  auto rep = check_issp_lyap(v, sys, one, mu, chi, domain, opts);
  rep.name = "strict-iss-lyap";
  rep.horizon_limited = !sys.period().has_value();
  return rep;
}

FalsifyResult falsify(const Margin& predicate, const SamplingDomain& domain, std::size_t budget, std::uint64_t seed,
                      double tol) {
  if (budget < 1) budget = 1;
  FalsifyResult res;
  res.margin = std::numeric_limits<double>::infinity();
  const std::size_t n_random = std::max<std::size_t>(1, budget / 2);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> c(cube_dim(domain));
  bool found = false;
  for (std::size_t i = 0; i < n_random; ++i) {
    for (double& e : c) e = unif(rng);
    Sample s = map_point(domain, c);
    ++res.evaluations;
    auto m = predicate(s);
    if (m && (!found || *m < res.margin)) {
      res.margin = *m;
      res.worst_point = std::move(s);
      found = true;
    }
  }
  if (found && budget > n_random) {
    auto [pt, m] = descend(predicate, domain, res.worst_point, res.margin, budget - n_random, res.evaluations);
    res.worst_point = std::move(pt);
    res.margin = m;
  }
  res.pass = !found || res.margin >= -tol;
  return res;
}

InequalityReport check_iss_estimate(std::span<const Trajectory> batch, const DecayRate& p, const KLFunction& beta,
                                    const GainFunction& gamma, double tol) {
  InequalityReport rep;
  rep.name = "iss-estimate";
  rep.tol = tol;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  rep.horizon_limited = true;
  for (const auto& traj : batch) {
    if (traj.times.empty()) continue;
    const double r0 = norm(traj.states.front());
    double clock = 0.0;
    double sup_u = norm(traj.inputs.front());
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
      if (k > 0) {
        const double a = traj.times[k - 1];
        const double b = traj.times[k];
        const double mid = 0.5 * (a + b);
        clock += (b - a) / 6.0 * (p(a) + 4.0 * p(mid) + p(b));
        sup_u = std::max({sup_u, norm(traj.input_used(mid)), norm(traj.inputs[k])});
      }
      const double margin = beta(r0, clock) + gamma(sup_u) - norm(traj.states[k]);
      ++rep.n_samples;
      if (margin < rep.worst_margin) {
        rep.worst_margin = margin;
        rep.worst_point = Sample{traj.times[k], traj.states[k], traj.inputs[k]};
      }
    }
  }
  rep.pass = rep.n_samples == 0 || rep.worst_margin >= -tol;
  rep.domain = fmt::format("{} trajectories", batch.size());
  return rep;
}

namespace {

double run_amplitude(const Trajectory& traj) {
  double a = 0.0;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    a = std::max(a, norm(traj.inputs[k]));
    if (k > 0) a = std::max(a, norm(traj.input_used(0.5 * (traj.times[k - 1] + traj.times[k]))));
  }
  return a;
}

std::vector<double> clock_along(const Trajectory& traj, const DecayRate& p) {
  std::vector<double> r(traj.times.size(), 0.0);
  for (std::size_t k = 1; k < traj.times.size(); ++k) {
    const double a = traj.times[k - 1];
    const double b = traj.times[k];
    r[k] = r[k - 1] + (b - a) / 6.0 * (p(a) + 4.0 * p(0.5 * (a + b)) + p(b));
  }
  return r;
}

}  // namespace

IssEnvelope fit_iss_envelope(std::span<const Trajectory> batch, const DecayRate& p) {
  std::vector<const Trajectory*> zero_train, zero_held, dist_train, dist_held;
  for (const auto& traj : batch) {
    const bool zero = traj.input_used.is_zero();
    auto& train = zero ? zero_train : dist_train;
    auto& held = zero ? zero_held : dist_held;
    (train.size() <= held.size() ? train : held).push_back(&traj);
  }
  if (zero_train.empty()) throw Error(ErrorKind::FitFailed, "batch has no zero-input runs to fit beta");

  // log(|x|/|x0|) = a - lambda r, least squares over all zero-input samples
  double sr = 0.0, sy = 0.0, srr = 0.0, sry = 0.0;
  std::size_t cnt = 0;
  std::vector<std::vector<double>> clocks;
  for (const auto* traj : zero_train) {
    const double r0 = norm(traj->states.front());
    clocks.push_back(clock_along(*traj, p));
    if (r0 <= 0.0) continue;
    for (std::size_t k = 0; k < traj->times.size(); ++k) {
      const double rk = norm(traj->states[k]);
      if (rk <= 1e-8 * r0) break;
      const double y = std::log(rk / r0);
      const double r = clocks.back()[k];
      sr += r;
      sy += y;
      srr += r * r;
      sry += r * y;
      ++cnt;
    }
  }
  const double denom = static_cast<double>(cnt) * srr - sr * sr;
  if (cnt < 2 || !(denom > 0.0)) throw Error(ErrorKind::FitFailed, "zero-input runs carry no decay information");
  const double slope = (static_cast<double>(cnt) * sry - sr * sy) / denom;
  const double lambda = -0.97 * slope;
  if (!(lambda > 0.0)) throw Error(ErrorKind::FitFailed, fmt::format("fitted decay rate {} is not positive", -slope));

  double c = 1.0;
  for (std::size_t i = 0; i < zero_train.size(); ++i) {
    const auto* traj = zero_train[i];
    const double r0 = norm(traj->states.front());
    if (r0 <= 0.0) continue;
    for (std::size_t k = 0; k < traj->times.size(); ++k) {
      c = std::max(c, norm(traj->states[k]) / (r0 * std::exp(-lambda * clocks[i][k])));
    }
  }
  c *= 1.02;
  KLFunction beta([c, lambda](double s, double r) { return c * s * std::exp(-lambda * r); },
                  fmt::format("{}*s*exp(-{}*r)", c, lambda));

  // ultimate bounds vs amplitude, monotone hull through the origin
  std::vector<std::pair<double, double>> pts;
  for (const auto* traj : dist_train) {
    const auto clock = clock_along(*traj, p);
    const double r0 = norm(traj->states.front());
    double excess = 0.0;
    for (std::size_t k = 0; k < traj->times.size(); ++k) {
      excess = std::max(excess, norm(traj->states[k]) - beta(r0, clock[k]));
    }
    pts.emplace_back(run_amplitude(*traj), 1.1 * excess);
  }
  std::sort(pts.begin(), pts.end());
  std::vector<double> xs{0.0}, ys{0.0};
  for (const auto& [a, b] : pts) {
    if (a <= xs.back()) {
      ys.back() = std::max(ys.back(), b);
      continue;
    }
    xs.push_back(a);
    ys.push_back(std::max(ys.back(), b));
  }
  const double tail_slope = xs.size() > 1 ? std::max(ys.back() / xs.back(), 0.0) : 0.0;
  auto gamma_eval = [xs, ys, tail_slope](double a) {
    double base;
    if (a >= xs.back()) {
      base = ys.back() + tail_slope * (a - xs.back());
    } else {
      auto it = std::upper_bound(xs.begin(), xs.end(), a);
      const std::size_t i = static_cast<std::size_t>(it - xs.begin());
      const double w = (a - xs[i - 1]) / (xs[i] - xs[i - 1]);
      base = ys[i - 1] + w * (ys[i] - ys[i - 1]);
    }
    return base + 1e-6 * a;
  };
  GainFunction gamma(gamma_eval, nullptr, "monotone hull of ultimate bounds");

  std::vector<Trajectory> held;
  for (const auto* t : zero_held) held.push_back(*t);
  for (const auto* t : dist_held) held.push_back(*t);
  InequalityReport heldout;
  if (held.empty()) {
    std::vector<Trajectory> train;
    for (const auto* t : zero_train) train.push_back(*t);
    for (const auto* t : dist_train) train.push_back(*t);
    heldout = check_iss_estimate(train, p, beta, gamma);
    heldout.note = "no held-out runs; checked on the training batch";
  } else {
    heldout = check_iss_estimate(held, p, beta, gamma);
  }
  if (!heldout.pass) {
    throw Error(ErrorKind::FitFailed, fmt::format("held-out check failed with margin {} at t={}", heldout.worst_margin,
                                                  heldout.worst_point.t));
  }
  return IssEnvelope{beta, gamma, c, lambda, heldout};
}

}  // namespace strictlyap
