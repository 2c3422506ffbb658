// Scalar multivariate expressions: parse, print, evaluate and differentiate.
//
// Expressions are immutable trees over positional variables x1..xn and
// placeholder slots u1..um. Slots only exist while building composed
// functions and must be substituted away before evaluation.
#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <ostream>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

namespace webred {

/// Ordered coordinates (x1, ..., xn). Index 0 holds x1.
using Point = std::vector<double>;

enum class Op {
  constant,
  variable,
  slot,
  neg,
  sin,
  cos,
  exp,
  log,
  sqrt,
  add,
  sub,
  mul,
  div,
  pow
};

inline bool is_unary(Op op) { return op >= Op::neg && op <= Op::sqrt; }
inline bool is_binary(Op op) { return op >= Op::add; }

inline const char* function_name(Op op) {
  switch (op) {
    case Op::sin: return "sin";
    case Op::cos: return "cos";
    case Op::exp: return "exp";
    case Op::log: return "log";
    case Op::sqrt: return "sqrt";
    default: return "";
  }
}

/// Syntax error in expression text. position() is 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// Evaluation left the real domain (log/sqrt/pow of a bad base, division by
/// zero, overflow) or referenced a missing variable.
class EvalError : public std::runtime_error {
 public:
  explicit EvalError(const std::string& what) : std::runtime_error(what) {}
};

class Expr {
  struct Node {
    Op op;
    double value = 0.0;
    int index = 0;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
  };

  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

 public:
  Expr() : Expr(constant(0.0)) {}

  static Expr constant(double value) {
    if (!std::isfinite(value)) {
      throw std::invalid_argument("expression constants must be finite");
    }
    return Expr(std::make_shared<const Node>(Node{Op::constant, value, 0, {}, {}}));
  }
  static Expr variable(int index) {
    if (index < 1) throw std::invalid_argument("variable index must be >= 1");
    return Expr(std::make_shared<const Node>(Node{Op::variable, 0.0, index, {}, {}}));
  }
  static Expr slot(int index) {
    if (index < 1) throw std::invalid_argument("slot index must be >= 1");
    return Expr(std::make_shared<const Node>(Node{Op::slot, 0.0, index, {}, {}}));
  }
  // Raw node builders: no simplification. The parser uses these so that the
  // tree mirrors the text exactly.
  static Expr unary(Op op, const Expr& arg) {
    if (!is_unary(op)) throw std::invalid_argument("not a unary operator");
    return Expr(std::make_shared<const Node>(Node{op, 0.0, 0, arg.node_, {}}));
  }
  static Expr binary(Op op, const Expr& lhs, const Expr& rhs) {
    if (!is_binary(op)) throw std::invalid_argument("not a binary operator");
    return Expr(std::make_shared<const Node>(Node{op, 0.0, 0, lhs.node_, rhs.node_}));
  }

  Op op() const { return node_->op; }
  double value() const { return node_->value; }
  int index() const { return node_->index; }
  Expr lhs() const { return Expr(node_->lhs); }
  Expr rhs() const { return Expr(node_->rhs); }

  bool is_constant() const { return op() == Op::constant; }
  bool is_constant(double v) const { return is_constant() && value() == v; }

  /// Structural identity (constants compared by value).
  friend bool operator==(const Expr& a, const Expr& b) {
    if (a.node_ == b.node_) return true;
    if (a.op() != b.op()) return false;
    switch (a.op()) {
      case Op::constant: return a.value() == b.value();
      case Op::variable:
      case Op::slot: return a.index() == b.index();
      default: break;
    }
    if (is_unary(a.op())) return a.lhs() == b.lhs();
    return a.lhs() == b.lhs() && a.rhs() == b.rhs();
  }

 private:
  std::shared_ptr<const Node> node_;
};

// ---------------------------------------------------------------------------
// Simplifying builders. Folding is limited to constants and the identities
// 0+e, e+0, e-0, 0*e, 1*e, e*1, e/1, 0/e, e^1, e^0, --e.

namespace detail {

inline bool finite(double v) { return std::isfinite(v); }

inline bool is_integer(double v) {
  return std::isfinite(v) && std::floor(v) == v;
}

}  // namespace detail

inline Expr neg(const Expr& e) {
  if (e.is_constant()) return Expr::constant(-e.value());
  if (e.op() == Op::neg) return e.lhs();
  return Expr::unary(Op::neg, e);
}

inline Expr apply(Op fn, const Expr& e) {
  if (fn == Op::neg) return neg(e);
  if (e.is_constant()) {
    const double x = e.value();
    double r = std::numeric_limits<double>::quiet_NaN();
    switch (fn) {
      case Op::sin: r = std::sin(x); break;
      case Op::cos: r = std::cos(x); break;
      case Op::exp: r = std::exp(x); break;
      case Op::log: if (x > 0) r = std::log(x); break;
      case Op::sqrt: if (x >= 0) r = std::sqrt(x); break;
      default: break;
    }
    if (detail::finite(r)) return Expr::constant(r);
  }
  return Expr::unary(fn, e);
}

inline Expr sin(const Expr& e) { return apply(Op::sin, e); }
inline Expr cos(const Expr& e) { return apply(Op::cos, e); }
inline Expr exp(const Expr& e) { return apply(Op::exp, e); }
inline Expr log(const Expr& e) { return apply(Op::log, e); }
inline Expr sqrt(const Expr& e) { return apply(Op::sqrt, e); }

inline Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) {
    const double r = a.value() + b.value();
    if (detail::finite(r)) return Expr::constant(r);
  }
  if (a.is_constant(0.0)) return b;
  if (b.is_constant(0.0)) return a;
  return Expr::binary(Op::add, a, b);
}

inline Expr operator-(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) {
    const double r = a.value() - b.value();
    if (detail::finite(r)) return Expr::constant(r);
  }
  if (b.is_constant(0.0)) return a;
  if (a.is_constant(0.0)) return neg(b);
  return Expr::binary(Op::sub, a, b);
}

inline Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) {
    const double r = a.value() * b.value();
    if (detail::finite(r)) return Expr::constant(r);
  }
  if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::constant(0.0);
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(-1.0)) return neg(b);
  if (b.is_constant(-1.0)) return neg(a);
  return Expr::binary(Op::mul, a, b);
}

inline Expr operator/(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant() && b.value() != 0.0) {
    const double r = a.value() / b.value();
    if (detail::finite(r)) return Expr::constant(r);
  }
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(0.0) && !b.is_constant(0.0)) return Expr::constant(0.0);
  return Expr::binary(Op::div, a, b);
}

inline Expr pow(const Expr& base, const Expr& exponent) {
  if (exponent.is_constant(1.0)) return base;
  if (exponent.is_constant(0.0)) return Expr::constant(1.0);
  if (base.is_constant() && exponent.is_constant()) {
    const double b = base.value();
    const double x = exponent.value();
    if (b > 0 || (detail::is_integer(x) && (b != 0 || x > 0))) {
      const double r = std::pow(b, x);
      if (detail::finite(r)) return Expr::constant(r);
    }
  }
  return Expr::binary(Op::pow, base, exponent);
}

inline Expr operator-(const Expr& a) { return neg(a); }
inline Expr operator+(const Expr& a, double b) { return a + Expr::constant(b); }
inline Expr operator+(double a, const Expr& b) { return Expr::constant(a) + b; }
inline Expr operator-(const Expr& a, double b) { return a - Expr::constant(b); }
inline Expr operator-(double a, const Expr& b) { return Expr::constant(a) - b; }
inline Expr operator*(const Expr& a, double b) { return a * Expr::constant(b); }
inline Expr operator*(double a, const Expr& b) { return Expr::constant(a) * b; }
inline Expr operator/(const Expr& a, double b) { return a / Expr::constant(b); }
inline Expr operator/(double a, const Expr& b) { return Expr::constant(a) / b; }
inline Expr pow(const Expr& a, double b) { return pow(a, Expr::constant(b)); }

// ---------------------------------------------------------------------------
// Printing. Output is compact ("x1*cos(x1*x2)") and reparses to the same tree:
// a left operand is parenthesised when it binds looser than its parent, a
// right operand when it binds no tighter. Negative literals print as "-c";
// negation of a literal prints as "-(c)".

namespace detail {

inline int precedence(const Expr& e) {
  switch (e.op()) {
    case Op::add:
    case Op::sub: return 1;
    case Op::mul:
    case Op::div: return 2;
    case Op::pow: return 3;
    case Op::neg: return 4;
    case Op::constant: return e.value() < 0 || std::signbit(e.value()) ? 4 : 5;
    default: return 5;
  }
}

inline void format_number(std::string& out, double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("cannot format number");
  out.append(buf, end);
}

inline void print_to(std::string& out, const Expr& e);

inline void print_wrapped(std::string& out, const Expr& e, bool wrap) {
  if (wrap) out.push_back('(');
  print_to(out, e);
  if (wrap) out.push_back(')');
}

inline void print_to(std::string& out, const Expr& e) {
  switch (e.op()) {
    case Op::constant:
      format_number(out, e.value());
      return;
    case Op::variable:
      out.push_back('x');
      out += std::to_string(e.index());
      return;
    case Op::slot:
      out.push_back('u');
      out += std::to_string(e.index());
      return;
    case Op::neg: {
      out.push_back('-');
      const Expr arg = e.lhs();
      // "-2" would read back as a literal, and "-a*b" as (-a)*b.
      print_wrapped(out, arg, precedence(arg) < 5 || arg.is_constant());
      return;
    }
    case Op::sin:
    case Op::cos:
    case Op::exp:
    case Op::log:
    case Op::sqrt:
      out += function_name(e.op());
      print_wrapped(out, e.lhs(), true);
      return;
    case Op::pow: {
      // base is a primary; negations get parentheses for readability
      print_wrapped(out, e.lhs(), precedence(e.lhs()) < 5);
      out.push_back('^');
      print_wrapped(out, e.rhs(), precedence(e.rhs()) < 3);
      return;
    }
    default: {
      const int p = precedence(e);
      print_wrapped(out, e.lhs(), precedence(e.lhs()) < p);
      const char sym = e.op() == Op::add   ? '+'
                       : e.op() == Op::sub ? '-'
                       : e.op() == Op::mul ? '*'
                                           : '/';
      out.push_back(sym);
      print_wrapped(out, e.rhs(), precedence(e.rhs()) <= p);
      return;
    }
  }
}

}  // namespace detail

inline std::string to_string(const Expr& e) {
  std::string out;
  detail::print_to(out, e);
  return out;
}

inline std::ostream& operator<<(std::ostream& os, const Expr& e) {
  return os << to_string(e);
}

// ---------------------------------------------------------------------------
// Parsing.
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := base ('^' factor)?
//   base   := number | ident | ident '(' expr ')' | '(' expr ')' | '-' base
//
// A '-' immediately followed by a number literal yields a negative constant.

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr parse() {
    Expr e = expr();
    skip_space();
    if (pos_ < text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_ + 1); }
  [[noreturn]] void fail_at(const std::string& what, std::size_t at) const {
    throw ParseError(what, at + 1);
  }

  void skip_space() {
    while (pos_ < text_.size() &&
           (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' || text_[pos_] == '\r'))
      ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= text_.size()) fail(std::string("expected '") + c + "' but input ended");
      fail(std::string("expected '") + c + "'");
    }
  }

  char peek() {
    skip_space();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  Expr expr() {
    Expr lhs = term();
    for (;;) {
      if (accept('+')) lhs = Expr::binary(Op::add, lhs, term());
      else if (accept('-')) lhs = Expr::binary(Op::sub, lhs, term());
      else return lhs;
    }
  }

  Expr term() {
    Expr lhs = factor();
    for (;;) {
      if (accept('*')) lhs = Expr::binary(Op::mul, lhs, factor());
      else if (accept('/')) lhs = Expr::binary(Op::div, lhs, factor());
      else return lhs;
    }
  }

  Expr factor() {
    Expr b = base();
    if (accept('^')) return Expr::binary(Op::pow, b, factor());
    return b;
  }

  static bool is_digit(char c) { return c >= '0' && c <= '9'; }
  static bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }

  bool at_number() const {
    return pos_ < text_.size() &&
           (is_digit(text_[pos_]) ||
            (text_[pos_] == '.' && pos_ + 1 < text_.size() && is_digit(text_[pos_ + 1])));
  }

  double number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t q = pos_ + 1;
      if (q < text_.size() && (text_[q] == '+' || text_[q] == '-')) ++q;
      if (q < text_.size() && is_digit(text_[q])) {
        while (q < text_.size() && is_digit(text_[q])) ++q;
        pos_ = q;
      } else {
        fail_at("malformed exponent", q);
      }
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (ec != std::errc{} || ptr != text_.data() + pos_ || !std::isfinite(v))
      fail_at("malformed number", start);
    return v;
  }

  Expr base() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '-') {
      ++pos_;
      skip_space();
      if (at_number()) return Expr::constant(-number());
      return Expr::unary(Op::neg, base());
    }
    if (c == '(') {
      ++pos_;
      Expr inner = expr();
      expect(')');
      return inner;
    }
    if (at_number()) return Expr::constant(number());
    if (is_alpha(c)) return identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (is_alpha(text_[pos_]) || is_digit(text_[pos_]))) ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);

    if ((name[0] == 'x' || name[0] == 'u') && name.size() > 1) {
      bool digits = true;
      for (char d : name.substr(1)) digits = digits && is_digit(d);
      if (digits) {
        int index = 0;
        auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), index);
        if (ec != std::errc{} || index < 1) fail_at("variable index must be a positive integer", start);
        if (peek() == '(') fail_at("'" + std::string(name) + "' is not a function", start);
        return name[0] == 'x' ? Expr::variable(index) : Expr::slot(index);
      }
    }

    static constexpr Op functions[] = {Op::sin, Op::cos, Op::exp, Op::log, Op::sqrt};
    for (Op fn : functions) {
      if (name != function_name(fn)) continue;
      if (peek() != '(') fail("expected '(' after function " + std::string(name));
      ++pos_;
      Expr arg = expr();
      if (peek() == ',') fail("function " + std::string(name) + " takes exactly 1 argument");
      expect(')');
      return Expr::unary(fn, arg);
    }
    fail_at("unknown identifier '" + std::string(name) + "'", start);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Expr parse(std::string_view text) { return detail::Parser(text).parse(); }

// ---------------------------------------------------------------------------
// Evaluation.

namespace detail {

inline double eval_node(const Expr& e, std::span<const double> pt) {
  auto domain = [&](const char* what) -> EvalError {
    return EvalError(std::string(what) + " in " + to_string(e));
  };
  auto checked = [&](double r) {
    if (!std::isfinite(r)) throw domain("non-finite result");
    return r;
  };

  switch (e.op()) {
    case Op::constant: return e.value();
    case Op::variable:
      if (static_cast<std::size_t>(e.index()) > pt.size())
        throw EvalError("point does not supply x" + std::to_string(e.index()));
      return pt[e.index() - 1];
    case Op::slot:
      throw EvalError("unsubstituted slot u" + std::to_string(e.index()));
    default: break;
  }

  const double a = eval_node(e.lhs(), pt);
  switch (e.op()) {
    case Op::neg: return -a;
    case Op::sin: return std::sin(a);
    case Op::cos: return std::cos(a);
    case Op::exp: return checked(std::exp(a));
    case Op::log:
      if (!(a > 0)) throw domain("log of non-positive argument");
      return std::log(a);
    case Op::sqrt:
      if (a < 0) throw domain("sqrt of negative argument");
      return std::sqrt(a);
    default: break;
  }

  const double b = eval_node(e.rhs(), pt);
  switch (e.op()) {
    case Op::add: return checked(a + b);
    case Op::sub: return checked(a - b);
    case Op::mul: return checked(a * b);
    case Op::div:
      if (b == 0.0) throw domain("division by zero");
      return checked(a / b);
    case Op::pow:
      if (is_integer(b)) {
        if (a == 0.0 && b < 0) throw domain("division by zero");
      } else if (!(a > 0)) {
        throw domain("non-integer power of non-positive base");
      }
      return checked(std::pow(a, b));
    default: throw std::logic_error("unhandled operator");
  }
}

}  // namespace detail

inline double eval(const Expr& e, std::span<const double> pt) { return detail::eval_node(e, pt); }

// ---------------------------------------------------------------------------
// Inspection and substitution.

namespace detail {

inline void collect(const Expr& e, Op kind, std::set<int>& out) {
  if (e.op() == kind) out.insert(e.index());
  if (is_unary(e.op())) collect(e.lhs(), kind, out);
  if (is_binary(e.op())) {
    collect(e.lhs(), kind, out);
    collect(e.rhs(), kind, out);
  }
}

inline bool contains(const Expr& e, Op kind, int index) {
  if (e.op() == kind) return e.index() == index;
  if (is_unary(e.op())) return contains(e.lhs(), kind, index);
  if (is_binary(e.op())) return contains(e.lhs(), kind, index) || contains(e.rhs(), kind, index);
  return false;
}

}  // namespace detail

/// Indices of the x-variables occurring in e.
inline std::set<int> variables(const Expr& e) {
  std::set<int> out;
  detail::collect(e, Op::variable, out);
  return out;
}

/// Indices of the u-slots occurring in e.
inline std::set<int> slots(const Expr& e) {
  std::set<int> out;
  detail::collect(e, Op::slot, out);
  return out;
}

inline bool depends_on(const Expr& e, int variable) {
  return detail::contains(e, Op::variable, variable);
}

/// Replace slot u_i by values[i-1]. Every slot in e must be covered.
inline Expr substitute_slots(const Expr& e, std::span<const Expr> values) {
  switch (e.op()) {
    case Op::constant:
    case Op::variable: return e;
    case Op::slot:
      if (static_cast<std::size_t>(e.index()) > values.size())
        throw std::invalid_argument("no value for slot u" + std::to_string(e.index()));
      return values[e.index() - 1];
    default: break;
  }
  if (is_unary(e.op())) return Expr::unary(e.op(), substitute_slots(e.lhs(), values));
  return Expr::binary(e.op(), substitute_slots(e.lhs(), values), substitute_slots(e.rhs(), values));
}

/// Replace variable x_i by values[i-1]. Every variable in e must be covered.
inline Expr substitute_variables(const Expr& e, std::span<const Expr> values) {
  switch (e.op()) {
    case Op::constant:
    case Op::slot: return e;
    case Op::variable:
      if (static_cast<std::size_t>(e.index()) > values.size())
        throw std::invalid_argument("no value for variable x" + std::to_string(e.index()));
      return values[e.index() - 1];
    default: break;
  }
  if (is_unary(e.op())) return Expr::unary(e.op(), substitute_variables(e.lhs(), values));
  return Expr::binary(e.op(), substitute_variables(e.lhs(), values),
                      substitute_variables(e.rhs(), values));
}

// ---------------------------------------------------------------------------
// Differentiation.

namespace detail {

inline Expr derivative(const Expr& e, Op kind, int index) {
  switch (e.op()) {
    case Op::constant: return Expr::constant(0.0);
    case Op::variable:
    case Op::slot:
      return Expr::constant(e.op() == kind && e.index() == index ? 1.0 : 0.0);
    default: break;
  }

  const Expr u = e.lhs();
  const Expr du = derivative(u, kind, index);
  switch (e.op()) {
    case Op::neg: return neg(du);
    case Op::sin: return du * cos(u);
    case Op::cos: return neg(du * sin(u));
    case Op::exp: return du * e;
    case Op::log: return du / u;
    case Op::sqrt: return du / (2.0 * e);
    default: break;
  }

  const Expr v = e.rhs();
  const Expr dv = derivative(v, kind, index);
  switch (e.op()) {
    case Op::add: return du + dv;
    case Op::sub: return du - dv;
    case Op::mul: return du * v + u * dv;
    case Op::div: return (du * v - u * dv) / pow(v, 2.0);
    case Op::pow:
      if (dv.is_constant(0.0) && !contains(v, kind, index)) {
        // u^c: c*u^(c-1)*u', also valid for negative u with integer c
        return du * (v * pow(u, v - 1.0));
      }
      return e * (dv * log(u) + v * du / u);
    default: throw std::logic_error("unhandled operator");
  }
}

}  // namespace detail

/// Exact partial derivative with respect to x_index.
inline Expr diff(const Expr& e, int index) {
  if (index < 1) throw std::invalid_argument("variable index must be >= 1");
  return detail::derivative(e, Op::variable, index);
}

/// Exact partial derivative with respect to the slot u_index.
inline Expr diff_slot(const Expr& e, int index) {
  if (index < 1) throw std::invalid_argument("slot index must be >= 1");
  return detail::derivative(e, Op::slot, index);
}

}  // namespace webred
