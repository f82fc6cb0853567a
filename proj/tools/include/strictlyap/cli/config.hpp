#pragma once

// Problem description files: INI sections with quoted expression values.
//
//   [run]        seed, samples
//   [system]     n, m, f1..fn, period
//   [feedback]   u1..uk            (closes the first k inputs)
//   [lyapunov]   V, alpha1, alpha2, alpha3, period
//   [rate]       p, tau, period, extension, horizon
//   [gains]      mu, mu_tilde, omega, chi
//   [strictify]  mode (issp | disp-state | disp-value), factor
//   [domain]     t_min, t_max, x_max, u_max
//   [omega]      t_max, s_max
//   [sim]        t0, tf, step, x0 (states separated by ';'), u, u_breaks
//   [verify]     target (base | sharp)
//   [expect]     vsharp_coefficient, xi

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace strictlyap::cli {

enum class Mode { Issp, DispState, DispValue };

std::string_view to_string(Mode mode);

struct ProblemConfig {
  std::string name;
  std::uint64_t seed = 1;
  std::optional<std::size_t> samples;

  int n = 0;
  int m = 0;
  std::vector<std::string> f;
  std::optional<double> system_period;
  std::vector<std::string> feedback;

  std::string v;
  std::string alpha1;
  std::string alpha2;
  std::string alpha3;
  std::optional<double> lyapunov_period;

  std::optional<std::string> p;
  std::optional<double> tau;
  std::optional<double> rate_period;
  std::optional<std::string> extension;
  std::optional<double> horizon;

  std::map<std::string, std::string> gains;

  Mode mode = Mode::Issp;
  std::optional<double> factor;

  std::optional<double> t_min;
  std::optional<double> t_max;
  std::optional<double> x_max;
  std::optional<double> u_max;

  std::optional<double> omega_t_max;
  std::optional<double> omega_s_max;

  double t0 = 0.0;
  double tf = 10.0;
  double step = 1e-3;
  std::vector<std::vector<double>> x0;
  std::optional<std::string> u;
  std::vector<double> u_breaks;

  bool verify_sharp = false;

  std::optional<std::string> expect_vsharp_coefficient;
  std::optional<std::string> expect_xi;

  std::optional<std::string> gain(const std::string& key) const;
};

/// Throws config-error with the offending key; expression values are only
/// checked for being present here, they are parsed when the problem is
/// built.
ProblemConfig parse_config(std::istream& in, std::string name = "config");
ProblemConfig parse_config_text(std::string_view text, std::string name = "config");
ProblemConfig load_config(const std::string& path);

/// Splits at `sep` outside parentheses, trimming whitespace.
std::vector<std::string> split_top_level(std::string_view text, char sep);

}  // namespace strictlyap::cli
