#include "suffstat/expr.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <utility>

#include "suffstat/errors.hpp"

namespace suffstat {

struct Expr::Node {
  enum class Op {
    literal,
    variable,
    add,
    sub,
    mul,
    div,
    pow,
    neg,
    exp_fn,
    log_fn,
    sqrt_fn,
  };

  Op op;
  double literal = 0.0;
  std::size_t var = 0;  // 0-based
  std::shared_ptr<const Node> a, b;
};

namespace {

using Node = Expr::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make_node(Node::Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

NodePtr make_literal(double v) {
  auto n = std::make_shared<Node>();
  n->op = Node::Op::literal;
  n->literal = v;
  return n;
}

NodePtr make_variable(std::size_t idx) {
  auto n = std::make_shared<Node>();
  n->op = Node::Op::variable;
  n->var = idx;
  return n;
}

class Parser {
 public:
  Parser(std::string_view text, std::size_t dim) : text_(text), dim_(dim) {}

  NodePtr run() {
    skip_ws();
    if (at_end()) fail("empty expression");
    NodePtr e = parse_sum();
    skip_ws();
    if (!at_end()) fail("unexpected character '" + std::string(1, peek()) + "'");
    return e;
  }

 private:
  std::string_view text_;
  std::size_t dim_;
  std::size_t pos_ = 0;

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& what) const {
    // 1-based byte offsets; end-of-input points one past the last byte.
    throw ExprParseError("syntax error: " + what, pos_ + 1);
  }

  bool consume(char c) {
    skip_ws();
    if (!at_end() && peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!consume(c)) {
      if (at_end()) fail(std::string("expected '") + c + "', found end of input");
      fail(std::string("expected '") + c + "'");
    }
  }

  NodePtr parse_sum() {
    NodePtr e = parse_term();
    for (;;) {
      if (consume('+')) {
        e = make_node(Node::Op::add, e, parse_term());
      } else if (consume('-')) {
        e = make_node(Node::Op::sub, e, parse_term());
      } else {
        return e;
      }
    }
  }

  NodePtr parse_term() {
    NodePtr e = parse_factor();
    for (;;) {
      if (consume('*')) {
        e = make_node(Node::Op::mul, e, parse_factor());
      } else if (consume('/')) {
        e = make_node(Node::Op::div, e, parse_factor());
      } else {
        return e;
      }
    }
  }

  // factor := '-' factor | power
  NodePtr parse_factor() {
    if (consume('-')) return make_node(Node::Op::neg, parse_factor());
    return parse_power();
  }

  // power := atom ('^' pow_rhs)*   (left associative)
  NodePtr parse_power() {
    NodePtr e = parse_atom();
    while (consume('^')) e = make_node(Node::Op::pow, e, parse_pow_rhs());
    return e;
  }

  // The exponent may carry its own unary minus: x^-2.
  NodePtr parse_pow_rhs() {
    if (consume('-')) return make_node(Node::Op::neg, parse_pow_rhs());
    return parse_atom();
  }

  NodePtr parse_atom() {
    skip_ws();
    if (at_end()) fail("expected operand, found end of input");
    char c = peek();
    if (c == '(') {
      ++pos_;
      NodePtr e = parse_sum();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
    fail("expected operand");
  }

  NodePtr parse_number() {
    std::size_t start = pos_;
    while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    if (!at_end() && peek() == '.') {
      ++pos_;
      while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    }
    if (pos_ == start) fail("malformed number");
    if (!at_end() && (peek() == 'e' || peek() == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (!at_end() && (peek() == '+' || peek() == '-')) ++pos_;
      if (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) {
        while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
      } else {
        pos_ = mark;  // bare 'e' belongs to the next token, not this number
      }
    }
    std::string token(text_.substr(start, pos_ - start));
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
      pos_ = start;
      fail("malformed number '" + token + "'");
    }
    return make_literal(v);
  }

  NodePtr parse_ident() {
    std::size_t start = pos_;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_'))
      ++pos_;
    std::string name(text_.substr(start, pos_ - start));
    if (name == "exp" || name == "log" || name == "sqrt") {
      expect('(');
      NodePtr arg = parse_sum();
      expect(')');
      Node::Op op = name == "exp"   ? Node::Op::exp_fn
                    : name == "log" ? Node::Op::log_fn
                                    : Node::Op::sqrt_fn;
      return make_node(op, arg);
    }
    if (name.size() >= 2 && name[0] == 'x') {
      bool digits = true;
      for (std::size_t i = 1; i < name.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(name[i]))) digits = false;
      if (digits) {
        unsigned long idx = std::strtoul(name.c_str() + 1, nullptr, 10);
        if (idx == 0) {
          pos_ = start;
          fail("variable indices start at x1");
        }
        if (idx > dim_)
          throw ExprParseError("variable x" + std::to_string(idx) +
                                   " exceeds parameter dimension " + std::to_string(dim_),
                               start + 1);
        return make_variable(idx - 1);
      }
    }
    pos_ = start;
    fail("unknown identifier '" + name + "'");
  }
};

DualVector eval_node(const Node& n, std::span<const double> xi) {
  const std::size_t dim = xi.size();
  switch (n.op) {
    case Node::Op::literal: return dual_constant(dim, n.literal);
    case Node::Op::variable: return dual_variable(dim, n.var, xi[n.var]);
    case Node::Op::add: return dual_add(eval_node(*n.a, xi), eval_node(*n.b, xi));
    case Node::Op::sub: return dual_sub(eval_node(*n.a, xi), eval_node(*n.b, xi));
    case Node::Op::mul: return dual_mul(eval_node(*n.a, xi), eval_node(*n.b, xi));
    case Node::Op::div: return dual_div(eval_node(*n.a, xi), eval_node(*n.b, xi));
    case Node::Op::pow: return dual_pow(eval_node(*n.a, xi), eval_node(*n.b, xi));
    case Node::Op::neg: return dual_neg(eval_node(*n.a, xi));
    case Node::Op::exp_fn: return dual_exp(eval_node(*n.a, xi));
    case Node::Op::log_fn: return dual_log(eval_node(*n.a, xi));
    case Node::Op::sqrt_fn: return dual_sqrt(eval_node(*n.a, xi));
  }
  throw NumericError("corrupt expression node");
}

double eval_value(const Node& n, std::span<const double> xi) {
  switch (n.op) {
    case Node::Op::literal: return n.literal;
    case Node::Op::variable: return xi[n.var];
    case Node::Op::add: return eval_value(*n.a, xi) + eval_value(*n.b, xi);
    case Node::Op::sub: return eval_value(*n.a, xi) - eval_value(*n.b, xi);
    case Node::Op::mul: return eval_value(*n.a, xi) * eval_value(*n.b, xi);
    case Node::Op::div: {
      double d = eval_value(*n.b, xi);
      if (d == 0.0) throw DomainError("division by zero");
      return eval_value(*n.a, xi) / d;
    }
    case Node::Op::pow: {
      double base = eval_value(*n.a, xi);
      double e = eval_value(*n.b, xi);
      if (std::nearbyint(e) == e && std::fabs(e) <= 1e6) {
        long long k = static_cast<long long>(e);
        bool inv = k < 0;
        if (inv) k = -k;
        double r = 1.0;
        for (long long i = 0; i < k; ++i) r *= base;
        if (inv) {
          if (r == 0.0) throw DomainError("division by zero");
          r = 1.0 / r;
        }
        return r;
      }
      if (!(base > 0.0))
        throw DomainError("power with non-integer exponent requires positive base");
      return std::exp(e * std::log(base));
    }
    case Node::Op::neg: return -eval_value(*n.a, xi);
    case Node::Op::exp_fn: return std::exp(eval_value(*n.a, xi));
    case Node::Op::log_fn: {
      double v = eval_value(*n.a, xi);
      if (!(v > 0.0)) throw DomainError("log of non-positive value");
      return std::log(v);
    }
    case Node::Op::sqrt_fn: {
      double v = eval_value(*n.a, xi);
      if (!(v > 0.0)) throw DomainError("sqrt of non-positive value");
      return std::sqrt(v);
    }
  }
  throw NumericError("corrupt expression node");
}

std::string format_double(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
  }
  return std::string(buf, ptr);
}

void print_node(const Node& n, std::string& out) {
  switch (n.op) {
    case Node::Op::literal:
      if (n.literal < 0.0) {
        out += '(';
        out += format_double(n.literal);
        out += ')';
      } else {
        out += format_double(n.literal);
      }
      return;
    case Node::Op::variable:
      out += 'x';
      out += std::to_string(n.var + 1);
      return;
    case Node::Op::add:
    case Node::Op::sub:
    case Node::Op::mul:
    case Node::Op::div:
    case Node::Op::pow: {
      char sym = n.op == Node::Op::add   ? '+'
                 : n.op == Node::Op::sub ? '-'
                 : n.op == Node::Op::mul ? '*'
                 : n.op == Node::Op::div ? '/'
                                         : '^';
      out += '(';
      print_node(*n.a, out);
      out += sym;
      print_node(*n.b, out);
      out += ')';
      return;
    }
    case Node::Op::neg:
      out += "(-";
      print_node(*n.a, out);
      out += ')';
      return;
    case Node::Op::exp_fn:
    case Node::Op::log_fn:
    case Node::Op::sqrt_fn:
      out += n.op == Node::Op::exp_fn ? "exp(" : n.op == Node::Op::log_fn ? "log(" : "sqrt(";
      print_node(*n.a, out);
      out += ')';
      return;
  }
}

}  // namespace

Expr Expr::parse(std::string_view text, std::size_t d) {
  if (text.empty()) throw ExprParseError("syntax error: empty expression", 1);
  Parser p(text, d);
  Expr e;
  e.root_ = p.run();
  e.dim_ = d;
  return e;
}

std::string Expr::print() const {
  if (!root_) return "";
  std::string out;
  print_node(*root_, out);
  return out;
}

DualVector Expr::eval_grad(std::span<const double> xi) const {
  if (!root_) throw ConfigError("evaluating empty expression");
  if (xi.size() != dim_)
    throw ConfigError("parameter point has dimension " + std::to_string(xi.size()) +
                      ", expression expects " + std::to_string(dim_));
  return eval_node(*root_, xi);
}

double Expr::eval(std::span<const double> xi) const {
  if (!root_) throw ConfigError("evaluating empty expression");
  if (xi.size() != dim_)
    throw ConfigError("parameter point has dimension " + std::to_string(xi.size()) +
                      ", expression expects " + std::to_string(dim_));
  return eval_value(*root_, xi);
}

}  // namespace suffstat
