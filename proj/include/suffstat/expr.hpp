#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "suffstat/dual.hpp"

namespace suffstat {

// Arithmetic expression in parameter variables x1..xd with +, -, *, /, ^,
// unary minus and exp/log/sqrt. Immutable after parse; evaluation is pure.
//
// Precedence (high to low): ^  |  unary -  |  * /  |  + -
// Binary operators of equal precedence associate left.
class Expr {
 public:
  Expr() = default;

  // Parses `text` against dimension `d`. Reports syntax errors with a
  // 1-based byte offset and rejects variable indices above d.
  static Expr parse(std::string_view text, std::size_t d);

  // Fully parenthesized form; parse(print()) evaluates identically.
  std::string print() const;

  // Value and exact gradient at xi (forward-mode dual propagation).
  DualVector eval_grad(std::span<const double> xi) const;

  // Value only.
  double eval(std::span<const double> xi) const;

  std::size_t dim() const { return dim_; }
  bool empty() const { return root_ == nullptr; }

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
  std::size_t dim_ = 0;
};

}  // namespace suffstat
