#include "strictlyap/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

#include "strictlyap/error.hpp"

namespace strictlyap::expr {

std::string Variable::name() const {
  switch (kind) {
    case VarKind::Time: return "t";
    case VarKind::Arg: return "s";
    case VarKind::State: return "x" + std::to_string(index + 1);
    case VarKind::Input: return "u" + std::to_string(index + 1);
  }
  return "?";
}

struct Expr::Node {
  Kind kind = Kind::Number;
  double value = 0.0;
  std::string const_name;
  Variable var;
  Func func = Func::Sin;
  std::vector<Expr> args;
};

namespace {

struct FuncInfo {
  std::string_view name;
  Func func;
  int arity;
};

constexpr FuncInfo kFuncs[] = {
    {"sin", Func::Sin, 1},   {"cos", Func::Cos, 1},   {"tan", Func::Tan, 1},
    {"exp", Func::Exp, 1},   {"log", Func::Log, 1},   {"sqrt", Func::Sqrt, 1},
    {"abs", Func::Abs, 1},   {"max", Func::Max, 2},   {"min", Func::Min, 2},
    {"tanh", Func::Tanh, 1},
};

std::string_view func_name(Func f) {
  for (const auto& info : kFuncs) {
    if (info.func == f) return info.name;
  }
  return "?";
}

[[noreturn]] void domain_error(const std::string& what) { throw Error(ErrorKind::Domain, what); }

}  // namespace

Expr::Expr() : Expr(number(0.0)) {}

Expr::Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

Expr Expr::number(double v) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Number;
  n->value = v;
  return Expr(std::move(n));
}

Expr Expr::constant(double v, std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Number;
  n->value = v;
  n->const_name = std::move(name);
  return Expr(std::move(n));
}

Expr Expr::var(Variable v) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Var;
  n->var = v;
  return Expr(std::move(n));
}

Expr Expr::call(Func f, std::vector<Expr> args) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Call;
  n->func = f;
  n->args = std::move(args);
  return Expr(std::move(n));
}

Expr::Kind Expr::kind() const { return node_->kind; }
Func Expr::func() const { return node_->func; }
std::span<const Expr> Expr::children() const { return node_->args; }
const Variable& Expr::variable() const { return node_->var; }

std::optional<double> Expr::constant_value() const {
  if (node_->kind == Kind::Number) return node_->value;
  return std::nullopt;
}

// Smart constructors fold constants and the 0/1 identities.
Expr operator+(const Expr& a, const Expr& b) {
  auto ca = a.constant_value();
  auto cb = b.constant_value();
  if (ca && cb) return Expr::number(*ca + *cb);
  if (ca && *ca == 0.0) return b;
  if (cb && *cb == 0.0) return a;
  auto n = std::make_shared<Expr::Node>();
  n->kind = Expr::Kind::Add;
  n->args = {a, b};
  return Expr(std::move(n));
}

Expr operator-(const Expr& a, const Expr& b) {
  auto ca = a.constant_value();
  auto cb = b.constant_value();
  if (ca && cb) return Expr::number(*ca - *cb);
  if (cb && *cb == 0.0) return a;
  if (ca && *ca == 0.0) return -b;
  auto n = std::make_shared<Expr::Node>();
  n->kind = Expr::Kind::Sub;
  n->args = {a, b};
  return Expr(std::move(n));
}

Expr operator*(const Expr& a, const Expr& b) {
  auto ca = a.constant_value();
  auto cb = b.constant_value();
  if (ca && cb) return Expr::number(*ca * *cb);
  if ((ca && *ca == 0.0) || (cb && *cb == 0.0)) return Expr::number(0.0);
  if (ca && *ca == 1.0) return b;
  if (cb && *cb == 1.0) return a;
  auto n = std::make_shared<Expr::Node>();
  n->kind = Expr::Kind::Mul;
  n->args = {a, b};
  return Expr(std::move(n));
}

Expr operator/(const Expr& a, const Expr& b) {
  auto ca = a.constant_value();
  auto cb = b.constant_value();
  if (ca && cb && *cb != 0.0) return Expr::number(*ca / *cb);
  if (ca && *ca == 0.0) return Expr::number(0.0);
  if (cb && *cb == 1.0) return a;
  auto n = std::make_shared<Expr::Node>();
  n->kind = Expr::Kind::Div;
  n->args = {a, b};
  return Expr(std::move(n));
}

Expr operator-(const Expr& a) {
  if (auto c = a.constant_value()) return Expr::number(-*c);
  if (a.kind() == Expr::Kind::Neg) return a.children()[0];
  auto n = std::make_shared<Expr::Node>();
  n->kind = Expr::Kind::Neg;
  n->args = {a};
  return Expr(std::move(n));
}

Expr pow(const Expr& a, const Expr& b) {
  auto cb = b.constant_value();
  if (cb && *cb == 0.0) return Expr::number(1.0);
  if (cb && *cb == 1.0) return a;
  auto ca = a.constant_value();
  if (ca && cb) {
    double v = std::pow(*ca, *cb);
    if (std::isfinite(v)) return Expr::number(v);
  }
  auto n = std::make_shared<Expr::Node>();
  n->kind = Expr::Kind::Pow;
  n->args = {a, b};
  return Expr(std::move(n));
}

double Expr::eval(const Bindings& env) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::Number:
      return n.value;
    case Kind::Var:
      switch (n.var.kind) {
        case VarKind::Time:
          if (!env.t) throw Error(ErrorKind::UnboundVariable, "t");
          return *env.t;
        case VarKind::Arg:
          if (!env.s) throw Error(ErrorKind::UnboundVariable, "s");
          return *env.s;
        case VarKind::State:
          if (static_cast<std::size_t>(n.var.index) >= env.x.size())
            throw Error(ErrorKind::UnboundVariable, n.var.name());
          return env.x[n.var.index];
        case VarKind::Input:
          if (static_cast<std::size_t>(n.var.index) >= env.u.size())
            throw Error(ErrorKind::UnboundVariable, n.var.name());
          return env.u[n.var.index];
      }
      break;
    case Kind::Neg:
      return -n.args[0].eval(env);
    case Kind::Add:
      return n.args[0].eval(env) + n.args[1].eval(env);
    case Kind::Sub:
      return n.args[0].eval(env) - n.args[1].eval(env);
    case Kind::Mul:
      return n.args[0].eval(env) * n.args[1].eval(env);
    case Kind::Div: {
      double num = n.args[0].eval(env);
      double den = n.args[1].eval(env);
      if (den == 0.0) domain_error("division by zero");
      return num / den;
    }
    case Kind::Pow: {
      double base = n.args[0].eval(env);
      double ex = n.args[1].eval(env);
      if (ex == 2.0) return base * base;
      if (base < 0.0 && ex != std::floor(ex)) domain_error("negative base with non-integer exponent");
      if (base == 0.0 && ex < 0.0) domain_error("zero to a negative power");
      return std::pow(base, ex);
    }
    case Kind::Call: {
      double a = n.args[0].eval(env);
      switch (n.func) {
        case Func::Sin: return std::sin(a);
        case Func::Cos: return std::cos(a);
        case Func::Tan: return std::tan(a);
        case Func::Exp: return std::exp(a);
        case Func::Log:
          if (a <= 0.0) domain_error("log of nonpositive argument");
          return std::log(a);
        case Func::Sqrt:
          if (a < 0.0) domain_error("sqrt of negative argument");
          return std::sqrt(a);
        case Func::Abs: return std::abs(a);
        case Func::Max: return std::max(a, n.args[1].eval(env));
        case Func::Min: return std::min(a, n.args[1].eval(env));
        case Func::Tanh: return std::tanh(a);
      }
      break;
    }
  }
  return 0.0;
}

bool Expr::depends_on(const Variable& v) const {
  if (node_->kind == Kind::Var) return node_->var == v;
  for (const auto& c : node_->args) {
    if (c.depends_on(v)) return true;
  }
  return false;
}

bool Expr::depends_on(VarKind kind) const {
  if (node_->kind == Kind::Var) return node_->var.kind == kind;
  for (const auto& c : node_->args) {
    if (c.depends_on(kind)) return true;
  }
  return false;
}

int Expr::max_index(VarKind kind) const {
  if (node_->kind == Kind::Var) return node_->var.kind == kind ? node_->var.index + 1 : 0;
  int m = 0;
  for (const auto& c : node_->args) m = std::max(m, c.max_index(kind));
  return m;
}

bool Expr::is_smooth() const {
  if (node_->kind == Kind::Call &&
      (node_->func == Func::Abs || node_->func == Func::Max || node_->func == Func::Min))
    return false;
  for (const auto& c : node_->args) {
    if (!c.is_smooth()) return false;
  }
  return true;
}

Expr Expr::differentiate(const Variable& v) const {
  const Node& n = *node_;
  if (!depends_on(v)) return number(0.0);
  switch (n.kind) {
    case Kind::Number:
      return number(0.0);
    case Kind::Var:
      return number(1.0);
    case Kind::Neg:
      return -n.args[0].differentiate(v);
    case Kind::Add:
      return n.args[0].differentiate(v) + n.args[1].differentiate(v);
    case Kind::Sub:
      return n.args[0].differentiate(v) - n.args[1].differentiate(v);
    case Kind::Mul: {
      const Expr& a = n.args[0];
      const Expr& b = n.args[1];
      return a.differentiate(v) * b + a * b.differentiate(v);
    }
    case Kind::Div: {
      const Expr& a = n.args[0];
      const Expr& b = n.args[1];
      if (!b.depends_on(v)) return a.differentiate(v) / b;
      return (a.differentiate(v) * b - a * b.differentiate(v)) / pow(b, number(2.0));
    }
    case Kind::Pow: {
      const Expr& a = n.args[0];
      const Expr& b = n.args[1];
      if (!b.depends_on(v)) {
        return b * pow(a, b - number(1.0)) * a.differentiate(v);
      }
      Expr log_a = call(Func::Log, {a});
      if (!a.depends_on(v)) return *this * log_a * b.differentiate(v);
      return *this * (b.differentiate(v) * log_a + b * a.differentiate(v) / a);
    }
    case Kind::Call: {
      const Expr& a = n.args[0];
      Expr da = a.differentiate(v);
      switch (n.func) {
        case Func::Sin: return call(Func::Cos, {a}) * da;
        case Func::Cos: return -(call(Func::Sin, {a}) * da);
        case Func::Tan: return (number(1.0) + pow(*this, number(2.0))) * da;
        case Func::Exp: return *this * da;
        case Func::Log: return da / a;
        case Func::Sqrt: return da / (number(2.0) * *this);
        case Func::Tanh: return (number(1.0) - pow(*this, number(2.0))) * da;
        case Func::Abs:
        case Func::Max:
        case Func::Min:
          throw Error(ErrorKind::NonSmoothPrimitive,
                      std::string(func_name(n.func)) + " in d/d" + v.name() + " of " + to_string());
      }
      break;
    }
  }
  return number(0.0);
}

// ---------------------------------------------------------------------------
// Printing

namespace {

constexpr int kPrecAdd = 1;
constexpr int kPrecMul = 2;
constexpr int kPrecUnary = 3;
constexpr int kPrecPow = 4;
constexpr int kPrecAtom = 5;

int precedence(const Expr& e) {
  switch (e.kind()) {
    case Expr::Kind::Add:
    case Expr::Kind::Sub: return kPrecAdd;
    case Expr::Kind::Mul:
    case Expr::Kind::Div: return kPrecMul;
    case Expr::Kind::Neg: return kPrecUnary;
    case Expr::Kind::Pow: return kPrecPow;
    case Expr::Kind::Number: return *e.constant_value() < 0.0 ? kPrecUnary : kPrecAtom;
    default: return kPrecAtom;
  }
}

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string wrap(const Expr& e, bool parens) {
  return parens ? "(" + e.to_string() + ")" : e.to_string();
}

}  // namespace

std::string Expr::to_string() const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::Number:
      if (!n.const_name.empty()) return n.const_name;
      return format_number(n.value);
    case Kind::Var:
      return n.var.name();
    case Kind::Neg:
      return "-" + wrap(n.args[0], precedence(n.args[0]) < kPrecUnary);
    case Kind::Add:
    case Kind::Sub:
    case Kind::Mul:
    case Kind::Div: {
      int p = precedence(*this);
      const char* op = n.kind == Kind::Add ? " + " : n.kind == Kind::Sub ? " - "
                     : n.kind == Kind::Mul ? "*" : "/";
      return wrap(n.args[0], precedence(n.args[0]) < p) + op +
             wrap(n.args[1], precedence(n.args[1]) <= p);
    }
    case Kind::Pow:
      return wrap(n.args[0], precedence(n.args[0]) <= kPrecPow) + "^" +
             wrap(n.args[1], precedence(n.args[1]) < kPrecUnary);
    case Kind::Call: {
      std::string out(func_name(n.func));
      out += "(";
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) out += ", ";
        out += n.args[i].to_string();
      }
      return out + ")";
    }
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

enum class Tok { Number, Name, Op, LParen, RParen, Comma, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  double value = 0.0;
  int line = 1;
  int column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_space();
    Token tok;
    tok.line = line_;
    tok.column = col_;
    if (pos_ >= src_.size()) return tok;
    char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      std::size_t start = pos_;
      while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
        advance();
      if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        std::size_t save = pos_;
        int save_col = col_;
        advance();
        if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) advance();
        if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
          while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
        } else {
          pos_ = save;  // the 'e' belongs to a following name
          col_ = save_col;
        }
      }
      tok.kind = Tok::Number;
      tok.text = std::string(src_.substr(start, pos_ - start));
      auto res = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), tok.value);
      if (res.ec != std::errc() || res.ptr != tok.text.data() + tok.text.size())
        fail(tok, "malformed number '" + tok.text + "'");
      return tok;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        advance();
      tok.kind = Tok::Name;
      tok.text = std::string(src_.substr(start, pos_ - start));
      return tok;
    }
    advance();
    tok.text = std::string(1, c);
    switch (c) {
      case '+': case '-': case '*': case '/': case '^': tok.kind = Tok::Op; break;
      case '(': tok.kind = Tok::LParen; break;
      case ')': tok.kind = Tok::RParen; break;
      case ',': tok.kind = Tok::Comma; break;
      default: fail(tok, "unexpected character '" + tok.text + "'");
    }
    return tok;
  }

  [[noreturn]] static void fail(const Token& at, const std::string& what,
                                ErrorKind kind = ErrorKind::Syntax) {
    throw Error(kind, "line " + std::to_string(at.line) + ", column " + std::to_string(at.column) +
                          ": " + what);
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }
  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) advance();
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : lex_(src) { tok_ = lex_.next(); }

  Expr parse_all() {
    Expr e = parse_expr();
    if (tok_.kind != Tok::End) Lexer::fail(tok_, "unexpected '" + tok_.text + "'");
    return e;
  }

 private:
  bool at_op(char c) const { return tok_.kind == Tok::Op && tok_.text[0] == c; }
  void consume() { tok_ = lex_.next(); }

  Expr parse_expr() {
    Expr lhs = parse_term();
    while (at_op('+') || at_op('-')) {
      char op = tok_.text[0];
      consume();
      Expr rhs = parse_term();
      lhs = raw(op == '+' ? Expr::Kind::Add : Expr::Kind::Sub, lhs, rhs);
    }
    return lhs;
  }

  Expr parse_term() {
    Expr lhs = parse_unary();
    while (at_op('*') || at_op('/')) {
      char op = tok_.text[0];
      consume();
      Expr rhs = parse_unary();
      lhs = raw(op == '*' ? Expr::Kind::Mul : Expr::Kind::Div, lhs, rhs);
    }
    return lhs;
  }

  Expr parse_unary() {
    if (at_op('-')) {
      consume();
      return -parse_unary();
    }
    if (at_op('+')) {
      consume();
      return parse_unary();
    }
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (at_op('^')) {
      consume();
      Expr ex = parse_unary();
      return raw(Expr::Kind::Pow, base, ex);
    }
    return base;
  }

  Expr parse_primary() {
    Token t = tok_;
    switch (t.kind) {
      case Tok::Number:
        consume();
        return Expr::number(t.value);
      case Tok::LParen: {
        consume();
        Expr e = parse_expr();
        expect(Tok::RParen, "')'");
        return e;
      }
      case Tok::Name: {
        consume();
        if (tok_.kind == Tok::LParen) return parse_call(t);
        return name_to_expr(t);
      }
      case Tok::End:
        Lexer::fail(t, "unexpected end of input");
      default:
        Lexer::fail(t, "unexpected '" + t.text + "'");
    }
  }

  Expr parse_call(const Token& name) {
    const FuncInfo* info = nullptr;
    for (const auto& f : kFuncs) {
      if (f.name == name.text) info = &f;
    }
    if (!info) Lexer::fail(name, "unknown function '" + name.text + "'", ErrorKind::UnknownIdentifier);
    consume();  // '('
    std::vector<Expr> args;
    if (tok_.kind != Tok::RParen) {
      args.push_back(parse_expr());
      while (tok_.kind == Tok::Comma) {
        consume();
        args.push_back(parse_expr());
      }
    }
    expect(Tok::RParen, "')'");
    if (static_cast<int>(args.size()) != info->arity) {
      Lexer::fail(name,
                  name.text + " expects " + std::to_string(info->arity) + " argument(s), got " +
                      std::to_string(args.size()),
                  ErrorKind::Arity);
    }
    return Expr::call(info->func, std::move(args));
  }

  static Expr name_to_expr(const Token& t) {
    const std::string& s = t.text;
    if (s == "t") return Expr::var(Variable::time());
    if (s == "s") return Expr::var(Variable::arg());
    if (s == "pi") return Expr::constant(std::numbers::pi, "pi");
    if (s == "e") return Expr::constant(std::numbers::e, "e");
    if ((s[0] == 'x' || s[0] == 'u') && s.size() > 1 && s[1] != '0') {
      int idx = 0;
      auto res = std::from_chars(s.data() + 1, s.data() + s.size(), idx);
      if (res.ec == std::errc() && res.ptr == s.data() + s.size() && idx >= 1) {
        return Expr::var(s[0] == 'x' ? Variable::state(idx - 1) : Variable::input(idx - 1));
      }
    }
    for (const auto& f : kFuncs) {
      if (f.name == s) Lexer::fail(t, "function '" + s + "' used without arguments", ErrorKind::Arity);
    }
    Lexer::fail(t, "unknown identifier '" + s + "'", ErrorKind::UnknownIdentifier);
  }

  void expect(Tok kind, const char* what) {
    if (tok_.kind != kind) {
      Lexer::fail(tok_, std::string("expected ") + what +
                            (tok_.kind == Tok::End ? " before end of input" : ", got '" + tok_.text + "'"));
    }
    consume();
  }

  // Parsed trees keep the user's structure; folding is only applied by the
  // smart constructors used in differentiation.
  static Expr raw(Expr::Kind kind, const Expr& a, const Expr& b) { return Expr::binary(kind, a, b); }

  Lexer lex_;
  Token tok_;
};

}  // namespace

Expr Expr::binary(Kind kind, const Expr& a, const Expr& b) {
  auto n = std::make_shared<Expr::Node>();
  n->kind = kind;
  n->args = {a, b};
  return Expr(std::move(n));
}

Expr parse(std::string_view text) { return Parser(text).parse_all(); }

double eval_constant(std::string_view text) {
  Expr e = parse(text);
  if (e.depends_on(VarKind::Time) || e.depends_on(VarKind::Arg) || e.depends_on(VarKind::State) ||
      e.depends_on(VarKind::Input)) {
    throw Error(ErrorKind::Config, "expected a constant expression, got '" + std::string(text) + "'");
  }
  return e.eval({});
}

}  // namespace strictlyap::expr
