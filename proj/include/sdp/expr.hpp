#pragma once

// Small analytic expression language: constants, the coordinate variables
// x y z t lambda w1 w2, + - * /, integer powers, unary minus and
// sin cos exp log sqrt.  Expressions are immutable shared trees.

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sdp/jet.hpp"

namespace sdp {

enum class Var : std::uint8_t { x, y, z, t, lambda, w1, w2 };
inline constexpr int kNumVars = 7;

std::string_view var_name(Var v);
/// Returns false when `name` is not one of the coordinate names.
bool var_from_name(std::string_view name, Var& out);

enum class Op : std::uint8_t { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Log, Sqrt };

class ParseError : public std::runtime_error {
 public:
  enum class Kind { Syntax, UnknownIdentifier, DisallowedVariable };
  ParseError(Kind kind, std::size_t offset, const std::string& what);
  Kind kind() const { return kind_; }
  std::size_t offset() const { return offset_; }

 private:
  Kind kind_;
  std::size_t offset_;
};

class Expr {
 public:
  struct Node;

  Expr();  // the constant 0
  Expr(double value);  // NOLINT: implicit on purpose, constants mix freely
  static Expr variable(Var v);

  Op op() const;
  double constant() const;  // Op::Const only
  Var var() const;          // Op::Var only
  int exponent() const;     // Op::Pow only
  Expr lhs() const;         // operand of unary nodes, left operand of binary ones
  Expr rhs() const;

  bool is_constant(double v) const { return op() == Op::Const && constant() == v; }
  bool is_zero() const { return is_constant(0.0); }
  /// Bit mask over Var of the variables that occur.
  std::uint8_t free_vars() const;
  bool depends_on(Var v) const { return free_vars() & (1u << static_cast<int>(v)); }

  std::string str() const;
  bool operator==(const Expr& o) const;  // structural

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  friend Expr pow(const Expr& a, int n);
  friend Expr make_unary(Op op, const Expr& a);
  friend Expr make_binary(Op op, const Expr& a, const Expr& b);
  friend Expr make_pow(const Expr& a, int n);

 private:
  explicit Expr(std::shared_ptr<const Node> n) : n_(std::move(n)) {}
  std::shared_ptr<const Node> n_;
};

/// Builds a node without any folding (used by the parser and by tests that
/// need an exact tree).
Expr make_unary(Op op, const Expr& a);
Expr make_binary(Op op, const Expr& a, const Expr& b);
Expr make_pow(const Expr& a, int n);

Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr exp(const Expr& a);
Expr log(const Expr& a);
Expr sqrt(const Expr& a);

Expr parse(std::string_view source, std::span<const Var> allowed);
Expr parse(std::string_view source, std::initializer_list<Var> allowed);

/// Symbolic partial derivative; light constant folding only.
Expr differentiate(const Expr& e, Var v);

/// e with every occurrence of v replaced by `value`.
Expr substitute(const Expr& e, Var v, const Expr& value);

/// Values bound to variables for evaluation.
struct DoubleEnv {
  std::array<double, kNumVars> value{};
  std::uint8_t bound = 0;
  DoubleEnv& set(Var v, double x) {
    value[static_cast<int>(v)] = x;
    bound |= static_cast<std::uint8_t>(1u << static_cast<int>(v));
    return *this;
  }
};

struct JetEnv {
  std::shared_ptr<const JetLayout> layout;
  std::array<Jet, kNumVars> value{};
  std::uint8_t bound = 0;
  explicit JetEnv(std::shared_ptr<const JetLayout> l) : layout(std::move(l)) {}
  JetEnv& set(Var v, Jet j) {
    value[static_cast<int>(v)] = std::move(j);
    bound |= static_cast<std::uint8_t>(1u << static_cast<int>(v));
    return *this;
  }
};

double evaluate(const Expr& e, const DoubleEnv& env);
Jet evaluate(const Expr& e, const JetEnv& env);

}  // namespace sdp
