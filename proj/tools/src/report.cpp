#include "strictlyap/cli/report.hpp"

#include <algorithm>
#include <sstream>

#include <fmt/ostream.h>

namespace strictlyap::cli {

void Report::add(std::string key, std::string value) {
  if (sections_.empty()) section("report");
  sections_.back().entries.emplace_back(std::move(key), std::move(value));
}

void Report::add_check(const InequalityReport& r) {
  section("check " + r.name);
  add("pass", r.pass);
  add("worst_margin", r.worst_margin);
  add("worst_point", format_point(r.worst_point));
  add("samples", r.n_samples);
  add("tolerance", r.tol);
  add("domain", r.domain);
  add("seed", r.seed);
  if (r.horizon_limited) add("horizon_limited", true);
  if (!r.note.empty()) add("note", r.note);
}

void Report::write(std::ostream& out) const {
  bool first = true;
  for (const auto& sec : sections_) {
    if (!first) out << '\n';
    first = false;
    out << '[' << sec.name << "]\n";
    for (const auto& [k, v] : sec.entries) out << k << " = " << v << '\n';
  }
}

std::string Report::str() const {
  std::ostringstream os;
  write(os);
  return os.str();
}

std::string format_point(const Sample& s) {
  std::string out = fmt::format("t={}", s.t);
  for (std::size_t i = 0; i < s.x.size(); ++i) out += fmt::format(" x{}={}", i + 1, s.x[i]);
  for (std::size_t i = 0; i < s.u.size(); ++i) out += fmt::format(" u{}={}", i + 1, s.u[i]);
  return out;
}

void write_checks_csv(std::ostream& out, const std::vector<InequalityReport>& reports) {
  std::size_t n = 0;
  std::size_t m = 0;
  for (const auto& r : reports) {
    n = std::max(n, r.worst_point.x.size());
    m = std::max(m, r.worst_point.u.size());
  }
  out << "name,pass,worst_margin,n_samples,tol,seed,t";
  for (std::size_t i = 1; i <= n; ++i) out << ",x" << i;
  for (std::size_t i = 1; i <= m; ++i) out << ",u" << i;
  out << '\n';
  for (const auto& r : reports) {
    fmt::print(out, "{},{},{},{},{},{},{}", r.name, r.pass ? 1 : 0, r.worst_margin, r.n_samples, r.tol, r.seed,
               r.worst_point.t);
    for (std::size_t i = 0; i < n; ++i) {
      if (i < r.worst_point.x.size()) {
        fmt::print(out, ",{}", r.worst_point.x[i]);
      } else {
        out << ',';
      }
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (i < r.worst_point.u.size()) {
        fmt::print(out, ",{}", r.worst_point.u[i]);
      } else {
        out << ',';
      }
    }
    out << '\n';
  }
}

}  // namespace strictlyap::cli
