#include "sdp/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace sdp {

struct Expr::Node {
  Op op = Op::Const;
  double value = 0.0;
  Var var = Var::x;
  int exponent = 0;
  std::uint8_t vars = 0;
  std::shared_ptr<const Node> a, b;
};

namespace {

constexpr std::array<std::string_view, kNumVars> kVarNames = {"x", "y", "z", "t", "lambda", "w1", "w2"};

int precedence(Op op) {
  switch (op) {
    case Op::Add:
    case Op::Sub:
      return 1;
    case Op::Mul:
    case Op::Div:
      return 2;
    case Op::Neg:
      return 3;
    case Op::Pow:
      return 4;
    default:
      return 5;
  }
}

const char* function_name(Op op) {
  switch (op) {
    case Op::Sin:
      return "sin";
    case Op::Cos:
      return "cos";
    case Op::Exp:
      return "exp";
    case Op::Log:
      return "log";
    case Op::Sqrt:
      return "sqrt";
    default:
      return nullptr;
  }
}

bool function_from_name(std::string_view name, Op& out) {
  for (Op op : {Op::Sin, Op::Cos, Op::Exp, Op::Log, Op::Sqrt}) {
    if (name == function_name(op)) {
      out = op;
      return true;
    }
  }
  return false;
}

std::string format_constant(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string_view var_name(Var v) { return kVarNames[static_cast<int>(v)]; }

bool var_from_name(std::string_view name, Var& out) {
  for (int i = 0; i < kNumVars; ++i) {
    if (kVarNames[i] == name) {
      out = static_cast<Var>(i);
      return true;
    }
  }
  return false;
}

ParseError::ParseError(Kind kind, std::size_t offset, const std::string& what)
    : std::runtime_error(what + " at byte " + std::to_string(offset)), kind_(kind), offset_(offset) {}

Expr::Expr() : Expr(0.0) {}

Expr::Expr(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("expression constant must be finite");
  auto n = std::make_shared<Node>();
  n->op = Op::Const;
  n->value = std::fabs(value);
  if (std::signbit(value) && value != 0.0) {
    // negative literals have no token of their own: keep the tree printable
    auto neg = std::make_shared<Node>();
    neg->op = Op::Neg;
    neg->a = n;
    n_ = neg;
  } else {
    n->value = value == 0.0 ? 0.0 : value;
    n_ = n;
  }
}

Expr Expr::variable(Var v) {
  auto n = std::make_shared<Node>();
  n->op = Op::Var;
  n->var = v;
  n->vars = static_cast<std::uint8_t>(1u << static_cast<int>(v));
  return Expr(std::shared_ptr<const Node>(n));
}

Op Expr::op() const { return n_->op; }
double Expr::constant() const { return n_->value; }
Var Expr::var() const { return n_->var; }
int Expr::exponent() const { return n_->exponent; }
Expr Expr::lhs() const { return Expr(n_->a); }
Expr Expr::rhs() const { return Expr(n_->b); }
std::uint8_t Expr::free_vars() const { return n_->vars; }

bool Expr::operator==(const Expr& o) const {
  const Node* p = n_.get();
  const Node* q = o.n_.get();
  if (p == q) return true;
  if (p->op != q->op) return false;
  switch (p->op) {
    case Op::Const:
      return std::memcmp(&p->value, &q->value, sizeof(double)) == 0;
    case Op::Var:
      return p->var == q->var;
    case Op::Pow:
      return p->exponent == q->exponent && Expr(p->a) == Expr(q->a);
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
      return Expr(p->a) == Expr(q->a) && Expr(p->b) == Expr(q->b);
    default:
      return Expr(p->a) == Expr(q->a);
  }
}

std::string Expr::str() const {
  const Node& n = *n_;
  switch (n.op) {
    case Op::Const:
      return format_constant(n.value);
    case Op::Var:
      return std::string(var_name(n.var));
    case Op::Neg: {
      const Expr a = lhs();
      const std::string s = a.str();
      return precedence(a.op()) < precedence(Op::Neg) ? "-(" + s + ")" : "-" + s;
    }
    case Op::Pow: {
      const Expr a = lhs();
      const bool atomic = precedence(a.op()) == 5;
      return (atomic ? a.str() : "(" + a.str() + ")") + "^" + std::to_string(n.exponent);
    }
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
      static const char* sym[] = {" + ", " - ", "*", "/"};
      const int own = precedence(n.op);
      const Expr a = lhs(), b = rhs();
      std::string l = a.str(), r = b.str();
      if (precedence(a.op()) < own) l = "(" + l + ")";
      if (precedence(b.op()) <= own) r = "(" + r + ")";
      return l + sym[static_cast<int>(n.op) - static_cast<int>(Op::Add)] + r;
    }
    default:
      return std::string(function_name(n.op)) + "(" + lhs().str() + ")";
  }
}

Expr make_unary(Op op, const Expr& a) {
  auto n = std::make_shared<Expr::Node>();
  n->op = op;
  n->a = a.n_;
  n->vars = a.free_vars();
  return Expr(std::shared_ptr<const Expr::Node>(n));
}

Expr make_binary(Op op, const Expr& a, const Expr& b) {
  auto n = std::make_shared<Expr::Node>();
  n->op = op;
  n->a = a.n_;
  n->b = b.n_;
  n->vars = a.free_vars() | b.free_vars();
  return Expr(std::shared_ptr<const Expr::Node>(n));
}

Expr make_pow(const Expr& a, int n) {
  auto node = std::make_shared<Expr::Node>();
  node->op = Op::Pow;
  node->a = a.n_;
  node->exponent = n;
  node->vars = a.free_vars();
  return Expr(std::shared_ptr<const Expr::Node>(node));
}

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (a.op() == Op::Const && b.op() == Op::Const) return Expr(a.constant() + b.constant());
  return make_binary(Op::Add, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
  if (b.is_zero()) return a;
  if (a.is_zero()) return -b;
  if (a.op() == Op::Const && b.op() == Op::Const) return Expr(a.constant() - b.constant());
  return make_binary(Op::Sub, a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_zero() || b.is_zero()) return Expr(0.0);
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  if (a.op() == Op::Const && b.op() == Op::Const) return Expr(a.constant() * b.constant());
  return make_binary(Op::Mul, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
  if (a.is_zero() && !b.is_zero()) return Expr(0.0);
  if (b.is_constant(1.0)) return a;
  return make_binary(Op::Div, a, b);
}

Expr operator-(const Expr& a) {
  if (a.is_zero()) return a;
  if (a.op() == Op::Neg) return a.lhs();
  return make_unary(Op::Neg, a);
}

Expr pow(const Expr& a, int n) {
  if (n == 0) return Expr(1.0);
  if (n == 1) return a;
  if (a.is_zero() && n > 0) return a;
  return make_pow(a, n);
}

Expr sin(const Expr& a) { return a.is_zero() ? a : make_unary(Op::Sin, a); }
Expr cos(const Expr& a) { return a.is_zero() ? Expr(1.0) : make_unary(Op::Cos, a); }
Expr exp(const Expr& a) { return a.is_zero() ? Expr(1.0) : make_unary(Op::Exp, a); }
Expr log(const Expr& a) { return a.is_constant(1.0) ? Expr(0.0) : make_unary(Op::Log, a); }
Expr sqrt(const Expr& a) { return make_unary(Op::Sqrt, a); }

Expr differentiate(const Expr& e, Var v) {
  if (!e.depends_on(v)) return Expr(0.0);
  switch (e.op()) {
    case Op::Const:
      return Expr(0.0);
    case Op::Var:
      return Expr(1.0);
    case Op::Add:
      return differentiate(e.lhs(), v) + differentiate(e.rhs(), v);
    case Op::Sub:
      return differentiate(e.lhs(), v) - differentiate(e.rhs(), v);
    case Op::Mul:
      return differentiate(e.lhs(), v) * e.rhs() + e.lhs() * differentiate(e.rhs(), v);
    case Op::Div: {
      const Expr a = e.lhs(), b = e.rhs();
      return (differentiate(a, v) * b - a * differentiate(b, v)) / pow(b, 2);
    }
    case Op::Pow: {
      const int n = e.exponent();
      return Expr(static_cast<double>(n)) * pow(e.lhs(), n - 1) * differentiate(e.lhs(), v);
    }
    case Op::Neg:
      return -differentiate(e.lhs(), v);
    case Op::Sin:
      return cos(e.lhs()) * differentiate(e.lhs(), v);
    case Op::Cos:
      return -(sin(e.lhs()) * differentiate(e.lhs(), v));
    case Op::Exp:
      return e * differentiate(e.lhs(), v);
    case Op::Log:
      return differentiate(e.lhs(), v) / e.lhs();
    case Op::Sqrt:
      return differentiate(e.lhs(), v) / (Expr(2.0) * e);
  }
  return Expr(0.0);
}

Expr substitute(const Expr& e, Var v, const Expr& value) {
  if (!e.depends_on(v)) return e;
  switch (e.op()) {
    case Op::Const:
      return e;
    case Op::Var:
      return value;
    case Op::Add:
      return substitute(e.lhs(), v, value) + substitute(e.rhs(), v, value);
    case Op::Sub:
      return substitute(e.lhs(), v, value) - substitute(e.rhs(), v, value);
    case Op::Mul:
      return substitute(e.lhs(), v, value) * substitute(e.rhs(), v, value);
    case Op::Div:
      return substitute(e.lhs(), v, value) / substitute(e.rhs(), v, value);
    case Op::Pow:
      return pow(substitute(e.lhs(), v, value), e.exponent());
    case Op::Neg:
      return -substitute(e.lhs(), v, value);
    case Op::Sin:
      return sin(substitute(e.lhs(), v, value));
    case Op::Cos:
      return cos(substitute(e.lhs(), v, value));
    case Op::Exp:
      return exp(substitute(e.lhs(), v, value));
    case Op::Log:
      return log(substitute(e.lhs(), v, value));
    case Op::Sqrt:
      return sqrt(substitute(e.lhs(), v, value));
  }
  return e;
}

// ---------------------------------------------------------------- parser

namespace {

class Parser {
 public:
  Parser(std::string_view src, std::span<const Var> allowed) : src_(src) {
    for (Var v : allowed) allowed_ |= static_cast<std::uint8_t>(1u << static_cast<int>(v));
  }

  Expr run() {
    Expr e = parse_sum();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected character '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;
  std::uint8_t allowed_ = 0;

  [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
    throw ParseError(ParseError::Kind::Syntax, at, "syntax error: " + msg);
  }
  [[noreturn]] void fail(const std::string& msg) const { fail(msg, pos_); }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= src_.size()) fail(std::string("expected '") + c + "' before end of input");
      fail(std::string("expected '") + c + "'");
    }
  }

  Expr parse_sum() {
    Expr e = parse_product();
    for (;;) {
      if (accept('+'))
        e = make_binary(Op::Add, e, parse_product());
      else if (accept('-'))
        e = make_binary(Op::Sub, e, parse_product());
      else
        return e;
    }
  }

  Expr parse_product() {
    Expr e = parse_unary();
    for (;;) {
      if (accept('*'))
        e = make_binary(Op::Mul, e, parse_unary());
      else if (accept('/'))
        e = make_binary(Op::Div, e, parse_unary());
      else
        return e;
    }
  }

  Expr parse_unary() {
    if (accept('-')) return make_unary(Op::Neg, parse_unary());
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_atom();
    skip_ws();
    if (!accept('^')) return base;
    skip_ws();
    const std::size_t at = pos_;
    const Expr ex = parse_unary();
    return make_pow(base, fold_integer(ex, at));
  }

  int fold_integer(const Expr& e, std::size_t at) const {
    if (e.free_vars() != 0) fail("exponent must be an integer constant", at);
    double v = 0.0;
    try {
      v = evaluate(e, DoubleEnv{});
    } catch (const DomainError&) {
      fail("exponent must be an integer constant", at);
    }
    if (v != std::floor(v) || std::fabs(v) > 1024.0) fail("exponent must be an integer constant", at);
    return static_cast<int>(v);
  }

  Expr parse_atom() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parse_sum();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_, ++n;
      return n;
    };
    std::size_t n = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      n += digits();
    }
    if (n == 0) fail("malformed number", start);
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) fail("malformed exponent in number", start);
    }
    const std::string text(src_.substr(start, pos_ - start));
    const double v = std::strtod(text.c_str(), nullptr);
    if (!std::isfinite(v)) fail("number out of range", start);
    return Expr(v);
  }

  Expr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);
    Op fn;
    if (function_from_name(name, fn)) {
      skip_ws();
      if (pos_ >= src_.size() || src_[pos_] != '(') fail("function '" + std::string(name) + "' requires parentheses");
      ++pos_;
      Expr arg = parse_sum();
      expect(')');
      return make_unary(fn, arg);
    }
    Var v;
    if (!var_from_name(name, v))
      throw ParseError(ParseError::Kind::UnknownIdentifier, start, "unknown identifier '" + std::string(name) + "'");
    if (!(allowed_ & (1u << static_cast<int>(v))))
      throw ParseError(ParseError::Kind::DisallowedVariable, start,
                       "variable '" + std::string(name) + "' is not among the declared coordinates");
    return Expr::variable(v);
  }
};

}  // namespace

Expr parse(std::string_view source, std::span<const Var> allowed) { return Parser(source, allowed).run(); }

Expr parse(std::string_view source, std::initializer_list<Var> allowed) {
  return parse(source, std::span<const Var>(allowed.begin(), allowed.size()));
}

// ------------------------------------------------------------ evaluation

namespace {

double checked_div(double a, double b) {
  if (b == 0.0) throw DomainError("division by zero");
  return a / b;
}

double ipow(double x, int n) {
  if (n < 0) return ipow(checked_div(1.0, x), -n);
  double r = 1.0;
  while (n > 0) {
    if (n & 1) r *= x;
    x *= x;
    n >>= 1;
  }
  return r;
}

double eval_d(const Expr& e, const DoubleEnv& env) {
  switch (e.op()) {
    case Op::Const:
      return e.constant();
    case Op::Var: {
      const int i = static_cast<int>(e.var());
      if (!(env.bound & (1u << i))) throw std::logic_error("unbound variable " + std::string(var_name(e.var())));
      return env.value[i];
    }
    case Op::Add:
      return eval_d(e.lhs(), env) + eval_d(e.rhs(), env);
    case Op::Sub:
      return eval_d(e.lhs(), env) - eval_d(e.rhs(), env);
    case Op::Mul:
      return eval_d(e.lhs(), env) * eval_d(e.rhs(), env);
    case Op::Div:
      return checked_div(eval_d(e.lhs(), env), eval_d(e.rhs(), env));
    case Op::Pow:
      return ipow(eval_d(e.lhs(), env), e.exponent());
    case Op::Neg:
      return -eval_d(e.lhs(), env);
    case Op::Sin:
      return std::sin(eval_d(e.lhs(), env));
    case Op::Cos:
      return std::cos(eval_d(e.lhs(), env));
    case Op::Exp:
      return std::exp(eval_d(e.lhs(), env));
    case Op::Log: {
      const double a = eval_d(e.lhs(), env);
      if (!(a > 0.0)) throw DomainError("log of nonpositive value");
      return std::log(a);
    }
    case Op::Sqrt: {
      const double a = eval_d(e.lhs(), env);
      if (a < 0.0) throw DomainError("sqrt of negative value");
      return std::sqrt(a);
    }
  }
  return 0.0;
}

Jet eval_j(const Expr& e, const JetEnv& env) {
  switch (e.op()) {
    case Op::Const:
      return Jet(env.layout, e.constant());
    case Op::Var: {
      const int i = static_cast<int>(e.var());
      if (!(env.bound & (1u << i))) throw std::logic_error("unbound variable " + std::string(var_name(e.var())));
      return env.value[i];
    }
    case Op::Add:
      return eval_j(e.lhs(), env) + eval_j(e.rhs(), env);
    case Op::Sub:
      return eval_j(e.lhs(), env) - eval_j(e.rhs(), env);
    case Op::Mul: {
      // constant factors are common in built expressions; skip the convolution
      if (e.lhs().op() == Op::Const) return eval_j(e.rhs(), env) * e.lhs().constant();
      if (e.rhs().op() == Op::Const) return eval_j(e.lhs(), env) * e.rhs().constant();
      return eval_j(e.lhs(), env) * eval_j(e.rhs(), env);
    }
    case Op::Div:
      if (e.rhs().op() == Op::Const) return eval_j(e.lhs(), env) / e.rhs().constant();
      return eval_j(e.lhs(), env) / eval_j(e.rhs(), env);
    case Op::Pow:
      return pow(eval_j(e.lhs(), env), e.exponent());
    case Op::Neg:
      return -eval_j(e.lhs(), env);
    case Op::Sin:
      return sin(eval_j(e.lhs(), env));
    case Op::Cos:
      return cos(eval_j(e.lhs(), env));
    case Op::Exp:
      return exp(eval_j(e.lhs(), env));
    case Op::Log:
      return log(eval_j(e.lhs(), env));
    case Op::Sqrt:
      return sqrt(eval_j(e.lhs(), env));
  }
  return Jet(env.layout);
}

}  // namespace

double evaluate(const Expr& e, const DoubleEnv& env) { return eval_d(e, env); }

Jet evaluate(const Expr& e, const JetEnv& env) {
  if (!env.layout) throw std::logic_error("jet environment without layout");
  return eval_j(e, env);
}

}  // namespace sdp
