#pragma once

// Scalar expression language used to declare vector fields, Lyapunov
// candidates, decay rates, gains and disturbance signals.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?          (right associative)
//   primary := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
//
// Names: t, s, x1..xn, u1..um, the constants pi and e, and the functions
// sin cos tan exp log sqrt abs max min tanh.

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace strictlyap::expr {

enum class VarKind { Time, Arg, State, Input };

/// A free variable. `index` is zero-based for State/Input (x1 -> 0).
struct Variable {
  VarKind kind = VarKind::Time;
  int index = 0;

  static Variable time() { return {VarKind::Time, 0}; }
  static Variable arg() { return {VarKind::Arg, 0}; }
  static Variable state(int i) { return {VarKind::State, i}; }
  static Variable input(int i) { return {VarKind::Input, i}; }

  std::string name() const;
  friend bool operator==(const Variable&, const Variable&) = default;
};

/// Values for the free variables of an expression. Unset entries are
/// reported as unbound-variable when an expression needs them.
struct Bindings {
  std::optional<double> t;
  std::optional<double> s;
  std::span<const double> x;
  std::span<const double> u;
};

enum class Func { Sin, Cos, Tan, Exp, Log, Sqrt, Abs, Max, Min, Tanh };

class Expr {
 public:
  enum class Kind { Number, Var, Neg, Add, Sub, Mul, Div, Pow, Call };

  Expr();  // the literal 0

  static Expr number(double v);
  static Expr constant(double v, std::string name);
  static Expr var(Variable v);
  static Expr call(Func f, std::vector<Expr> args);
  /// Binary node without folding (parser output keeps the user's structure).
  static Expr binary(Kind kind, const Expr& a, const Expr& b);

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  friend Expr pow(const Expr& a, const Expr& b);

  Kind kind() const;
  Func func() const;
  std::span<const Expr> children() const;
  std::optional<double> constant_value() const;
  const Variable& variable() const;

  double eval(const Bindings& env) const;

  /// Symbolic partial derivative with 0/1 and constant folding. Throws
  /// non-smooth-primitive if abs/max/min depends on `v`.
  Expr differentiate(const Variable& v) const;

  bool depends_on(const Variable& v) const;
  bool depends_on(VarKind kind) const;
  /// Highest one-based index of x or u used, 0 when none.
  int max_index(VarKind kind) const;
  /// True when no abs/max/min node occurs.
  bool is_smooth() const;

  std::string to_string() const;

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> n);
  std::shared_ptr<const Node> node_;
};

Expr parse(std::string_view text);

/// Parses and evaluates an expression with no free variables.
double eval_constant(std::string_view text);

}  // namespace strictlyap::expr
