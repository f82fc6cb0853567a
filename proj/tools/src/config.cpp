#include "strictlyap/cli/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "strictlyap/error.hpp"
#include "strictlyap/expr.hpp"

namespace strictlyap::cli {

namespace pt = boost::property_tree;

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::Issp: return "issp";
    case Mode::DispState: return "disp-state";
    case Mode::DispValue: return "disp-value";
  }
  return "issp";
}

std::optional<std::string> ProblemConfig::gain(const std::string& key) const {
  auto it = gains.find(key);
  if (it == gains.end()) return std::nullopt;
  return it->second;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string unquote(std::string_view raw) {
  std::string s = trim(raw);
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\''))) {
    s = s.substr(1, s.size() - 2);
  }
  return s;
}

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::Config, where + ": " + what);
}

double number(const std::string& where, const std::string& text) {
  try {
    return expr::eval_constant(text);
  } catch (const Error& e) {
    fail(where, e.what());
  }
}

int integer(const std::string& where, const std::string& text) {
  const double v = number(where, text);
  if (v != static_cast<double>(static_cast<int>(v))) fail(where, "expected an integer, got '" + text + "'");
  return static_cast<int>(v);
}

std::vector<double> numbers(const std::string& where, const std::string& text, char sep) {
  std::vector<double> out;
  for (const auto& part : split_top_level(text, sep)) {
    if (part.empty()) fail(where, "empty entry in '" + text + "'");
    out.push_back(number(where, part));
  }
  return out;
}

// Index k of a key like "f3" or "u12"; nullopt if the key has another shape.
std::optional<int> indexed(const std::string& key, char prefix) {
  if (key.size() < 2 || key[0] != prefix || key[1] == '0') return std::nullopt;
  int k = 0;
  auto [ptr, ec] = std::from_chars(key.data() + 1, key.data() + key.size(), k);
  if (ec != std::errc() || ptr != key.data() + key.size()) return std::nullopt;
  return k;
}

using Section = std::map<std::string, std::string>;

class Reader {
 public:
  Reader(std::string name, Section sec) : name_(std::move(name)), sec_(std::move(sec)) {}

  std::optional<std::string> text(const std::string& key) {
    used_.insert(key);
    auto it = sec_.find(key);
    if (it == sec_.end()) return std::nullopt;
    return it->second;
  }
  std::string required(const std::string& key) {
    auto v = text(key);
    if (!v || v->empty()) fail(where(key), "missing value");
    return *v;
  }
  std::optional<double> num(const std::string& key) {
    auto v = text(key);
    if (!v) return std::nullopt;
    return number(where(key), *v);
  }
  std::string where(const std::string& key) const { return "[" + name_ + "] " + key; }
  const Section& all() const { return sec_; }
  void mark(const std::string& key) { used_.insert(key); }
  void finish() const {
    for (const auto& [k, v] : sec_) {
      if (!used_.count(k)) fail(where(k), "unknown key");
    }
  }

 private:
  std::string name_;
  Section sec_;
  std::set<std::string> used_;
};

}  // namespace

std::vector<std::string> split_top_level(std::string_view text, char sep) {
  std::vector<std::string> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == sep && depth == 0) {
      out.push_back(trim(text.substr(start, i - start)));
      start = i + 1;
    }
  }
  out.push_back(trim(text.substr(start)));
  return out;
}

ProblemConfig parse_config(std::istream& in, std::string name) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    fail(name, "line " + std::to_string(e.line()) + ": " + e.message());
  }

  std::map<std::string, Section> sections;
  for (const auto& [sec_name, sec] : tree) {
    if (sec.empty()) fail(name, "key '" + sec_name + "' outside a section");
    Section values;
    for (const auto& [key, node] : sec) values[key] = unquote(node.data());
    sections[sec_name] = std::move(values);
  }
  static const std::set<std::string> known = {"run",    "system", "feedback", "lyapunov", "rate",   "gains",
                                              "strictify", "domain", "omega",    "sim",      "verify", "expect"};
  for (const auto& [sec_name, sec] : sections) {
    if (!known.count(sec_name)) fail(name, "unknown section [" + sec_name + "]");
  }
  auto section = [&](const std::string& s) { return Reader(s, sections.count(s) ? sections[s] : Section{}); };

  ProblemConfig cfg;
  cfg.name = std::move(name);

  {
    Reader r = section("run");
    if (auto v = r.num("seed")) {
      if (*v < 0) fail(r.where("seed"), "must be non-negative");
      cfg.seed = static_cast<std::uint64_t>(*v);
    }
    if (auto v = r.num("samples")) {
      if (*v < 1) fail(r.where("samples"), "must be positive");
      cfg.samples = static_cast<std::size_t>(*v);
    }
    r.finish();
  }
  {
    Reader r = section("system");
    cfg.n = integer(r.where("n"), r.required("n"));
    cfg.m = integer(r.where("m"), r.text("m").value_or("0"));
    if (cfg.n < 1 || cfg.m < 0) fail(r.where("n"), "need n >= 1 and m >= 0");
    for (int i = 1; i <= cfg.n; ++i) cfg.f.push_back(r.required("f" + std::to_string(i)));
    cfg.system_period = r.num("period");
    r.finish();
  }
  {
    Reader r = section("feedback");
    int k = 0;
    for (const auto& [key, value] : r.all()) {
      auto idx = indexed(key, 'u');
      if (!idx) continue;
      k = std::max(k, *idx);
    }
    for (int i = 1; i <= k; ++i) cfg.feedback.push_back(r.required("u" + std::to_string(i)));
    if (k > cfg.m) fail(r.where("u" + std::to_string(k)), "feedback exceeds the system's m");
    r.finish();
  }
  {
    Reader r = section("lyapunov");
    cfg.v = r.required("V");
    cfg.alpha1 = r.required("alpha1");
    cfg.alpha2 = r.required("alpha2");
    cfg.alpha3 = r.required("alpha3");
    cfg.lyapunov_period = r.num("period");
    r.finish();
  }
  {
    Reader r = section("rate");
    cfg.p = r.text("p");
    cfg.tau = r.num("tau");
    cfg.rate_period = r.num("period");
    cfg.extension = r.text("extension");
    cfg.horizon = r.num("horizon");
    if (cfg.tau && !(*cfg.tau > 0.0)) fail(r.where("tau"), "must be positive");
    r.finish();
  }
  {
    Reader r = section("gains");
    for (const char* key : {"mu", "mu_tilde", "omega", "chi"}) {
      if (auto v = r.text(key)) cfg.gains[key] = *v;
    }
    r.finish();
  }
  {
    Reader r = section("strictify");
    const std::string mode = r.text("mode").value_or("issp");
    if (mode == "issp") {
      cfg.mode = Mode::Issp;
    } else if (mode == "disp-state") {
      cfg.mode = Mode::DispState;
    } else if (mode == "disp-value") {
      cfg.mode = Mode::DispValue;
    } else {
      fail(r.where("mode"), "expected issp, disp-state or disp-value, got '" + mode + "'");
    }
    cfg.factor = r.num("factor");
    r.finish();
  }
  {
    Reader r = section("domain");
    cfg.t_min = r.num("t_min");
    cfg.t_max = r.num("t_max");
    cfg.x_max = r.num("x_max");
    cfg.u_max = r.num("u_max");
    r.finish();
  }
  {
    Reader r = section("omega");
    cfg.omega_t_max = r.num("t_max");
    cfg.omega_s_max = r.num("s_max");
    r.finish();
  }
  {
    Reader r = section("sim");
    if (auto v = r.num("t0")) cfg.t0 = *v;
    if (auto v = r.num("tf")) cfg.tf = *v;
    if (auto v = r.num("step")) cfg.step = *v;
    if (auto v = r.text("x0")) {
      for (const auto& run : split_top_level(*v, ';')) {
        auto x = numbers(r.where("x0"), run, ',');
        if (static_cast<int>(x.size()) != cfg.n) {
          fail(r.where("x0"), "initial state '" + run + "' needs " + std::to_string(cfg.n) + " components");
        }
        cfg.x0.push_back(std::move(x));
      }
    }
    cfg.u = r.text("u");
    if (auto v = r.text("u_breaks")) cfg.u_breaks = numbers(r.where("u_breaks"), *v, ',');
    r.finish();
  }
  {
    Reader r = section("verify");
    const std::string target = r.text("target").value_or("base");
    if (target != "base" && target != "sharp") fail(r.where("target"), "expected base or sharp");
    cfg.verify_sharp = target == "sharp";
    r.finish();
  }
  {
    Reader r = section("expect");
    cfg.expect_vsharp_coefficient = r.text("vsharp_coefficient");
    cfg.expect_xi = r.text("xi");
    r.finish();
  }
  return cfg;
}

ProblemConfig parse_config_text(std::string_view text, std::string name) {
  std::istringstream in{std::string(text)};
  return parse_config(in, std::move(name));
}

ProblemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open config file '" + path + "'");
  return parse_config(in, path);
}

}  // namespace strictlyap::cli
