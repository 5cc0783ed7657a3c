#pragma once

// A tiny arithmetic language for potential modulation factors h(x, y).
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?
//   primary := number | 'x' | 'y' | 'r' | func '(' expr ')' | '(' expr ')'
//   func    := exp | sin | cos | tanh
//
// Anything else is rejected at parse time.

#include <memory>
#include <string>

namespace gpq {

class Expression {
 public:
  static Expression parse(const std::string& text);

  double operator()(double x, double y) const;
  const std::string& text() const { return text_; }

  struct Node;

 private:
  Expression() = default;

  std::string text_;
  std::shared_ptr<const Node> root_;
};

}  // namespace gpq
