#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "strictlyap/verify.hpp"

namespace strictlyap::cli {

/// Sectioned key = value text; keys keep insertion order.
class Report {
 public:
  void section(std::string name) { sections_.push_back({std::move(name), {}}); }

  void add(std::string key, std::string value);
  void add(std::string key, const char* value) { add(std::move(key), std::string(value)); }
  void add(std::string key, bool value) { add(std::move(key), std::string(value ? "true" : "false")); }
  template <class T>
  void add(std::string key, const T& value) {
    add(std::move(key), fmt::format("{}", value));
  }

  /// name, pass, worst margin, worst point, samples, domain, seed.
  void add_check(const InequalityReport& r);

  void write(std::ostream& out) const;
  std::string str() const;

 private:
  struct Section {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;
  };
  std::vector<Section> sections_;
};

std::string format_point(const Sample& s);

/// One row per check: name,pass,worst_margin,n_samples,tol,seed,t,x..,u..
void write_checks_csv(std::ostream& out, const std::vector<InequalityReport>& reports);

}  // namespace strictlyap::cli
