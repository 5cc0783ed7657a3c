#include "gpq/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <vector>

#include <fmt/format.h>

#include "gpq/errors.hpp"

namespace gpq {

struct Expression::Node {
  enum class Kind { Number, X, Y, R, Neg, Add, Sub, Mul, Div, Pow, Exp, Sin, Cos, Tanh };
  Kind kind;
  double number = 0.0;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;

  double eval(double x, double y) const {
    switch (kind) {
      case Kind::Number: return number;
      case Kind::X: return x;
      case Kind::Y: return y;
      case Kind::R: return std::hypot(x, y);
      case Kind::Neg: return -lhs->eval(x, y);
      case Kind::Add: return lhs->eval(x, y) + rhs->eval(x, y);
      case Kind::Sub: return lhs->eval(x, y) - rhs->eval(x, y);
      case Kind::Mul: return lhs->eval(x, y) * rhs->eval(x, y);
      case Kind::Div: return lhs->eval(x, y) / rhs->eval(x, y);
      case Kind::Pow: return std::pow(lhs->eval(x, y), rhs->eval(x, y));
      case Kind::Exp: return std::exp(lhs->eval(x, y));
      case Kind::Sin: return std::sin(lhs->eval(x, y));
      case Kind::Cos: return std::cos(lhs->eval(x, y));
      case Kind::Tanh: return std::tanh(lhs->eval(x, y));
    }
    return 0.0;
  }
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr leaf(Node::Kind k, double v = 0.0) {
  return std::make_shared<const Node>(Node{k, v, nullptr, nullptr});
}

NodePtr unary_node(Node::Kind k, NodePtr a) {
  return std::make_shared<const Node>(Node{k, 0.0, std::move(a), nullptr});
}

NodePtr binary_node(Node::Kind k, NodePtr a, NodePtr b) {
  return std::make_shared<const Node>(Node{k, 0.0, std::move(a), std::move(b)});
}

class Parser {
 public:
  explicit Parser(const std::string& text) : s_(text) {}

  NodePtr parse_all() {
    NodePtr e = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParameterError(fmt::format("modulation '{}': {} at column {}", s_, what, pos_ + 1));
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr e = term();
    for (;;) {
      if (accept('+')) e = binary_node(Node::Kind::Add, e, term());
      else if (accept('-')) e = binary_node(Node::Kind::Sub, e, term());
      else return e;
    }
  }

  NodePtr term() {
    NodePtr e = unary();
    for (;;) {
      if (accept('*')) e = binary_node(Node::Kind::Mul, e, unary());
      else if (accept('/')) e = binary_node(Node::Kind::Div, e, unary());
      else return e;
    }
  }

  NodePtr unary() {
    if (accept('-')) return unary_node(Node::Kind::Neg, unary());
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return binary_node(Node::Kind::Pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("malformed number");
      pos_ += static_cast<std::size_t>(end - begin);
      return leaf(Node::Kind::Number, v);
    }
    if (accept('(')) {
      NodePtr e = expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t end = pos_;
      while (end < s_.size() && std::isalpha(static_cast<unsigned char>(s_[end]))) ++end;
      const std::string word = s_.substr(pos_, end - pos_);
      pos_ = end;
      if (word == "x") return leaf(Node::Kind::X);
      if (word == "y") return leaf(Node::Kind::Y);
      if (word == "r") return leaf(Node::Kind::R);
      Node::Kind k;
      if (word == "exp") k = Node::Kind::Exp;
      else if (word == "sin") k = Node::Kind::Sin;
      else if (word == "cos") k = Node::Kind::Cos;
      else if (word == "tanh") k = Node::Kind::Tanh;
      else {
        pos_ -= word.size();
        fail(fmt::format("unknown identifier '{}'", word));
      }
      if (!accept('(')) fail("expected '(' after function name");
      NodePtr arg = expr();
      if (!accept(')')) fail("expected ')'");
      return unary_node(k, arg);
    }
    fail(fmt::format("unexpected character '{}'", c));
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(const std::string& text) {
  Expression e;
  e.text_ = text;
  e.root_ = Parser(text).parse_all();
  return e;
}

double Expression::operator()(double x, double y) const { return root_->eval(x, y); }

}  // namespace gpq
