// Copyright 2026 The sigdyn Authors
// SPDX-License-Identifier: Apache-2.0

#include "sigdyn/cost_expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

#include "sigdyn/error.hpp"

namespace sigdyn {

struct CostExpr::Node {
  enum class Op { constant, variable, add, sub, mul, div, neg, pow };
  Op op;
  double value = 0.0;  // constant
  int exponent = 0;    // pow
  std::shared_ptr<const Node> lhs, rhs;
};

namespace {

using NodePtr = std::shared_ptr<const CostExpr::Node>;
using Op = CostExpr::Node::Op;

NodePtr make(Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
  auto n = std::make_shared<CostExpr::Node>();
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr parse_all() {
    NodePtr root = expr();
    skip_ws();
    if (pos_ != src_.size()) error("unexpected character");
    return root;
  }

 private:
  [[noreturn]] void error(const char* what) const {
    fail_validation("cost expression '" + std::string(src_) + "': " + what +
                    " at offset " + std::to_string(pos_));
  }

  void skip_ws() {
    while (pos_ < src_.size() &&
           std::isspace(static_cast<unsigned char>(src_[pos_])))
      ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+'))
        lhs = make(Op::add, lhs, term());
      else if (accept('-'))
        lhs = make(Op::sub, lhs, term());
      else
        return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*'))
        lhs = make(Op::mul, lhs, unary());
      else if (accept('/'))
        lhs = make(Op::div, lhs, unary());
      else
        return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Op::neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (!accept('^')) return base;
    skip_ws();
    int exponent = 0;
    const char* first = src_.data() + pos_;
    const char* last = src_.data() + src_.size();
    auto [ptr, ec] = std::from_chars(first, last, exponent);
    if (ec != std::errc() || exponent < 0)
      error("exponent must be a non-negative integer literal");
    pos_ += static_cast<std::size_t>(ptr - first);
    auto n = std::make_shared<CostExpr::Node>();
    n->op = Op::pow;
    n->exponent = exponent;
    n->lhs = std::move(base);
    return n;
  }

  NodePtr atom() {
    skip_ws();
    if (pos_ >= src_.size()) error("unexpected end of input");
    char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = expr();
      if (!accept(')')) error("expected ')'");
      return inner;
    }
    if (c == 'x') {
      ++pos_;
      return make(Op::variable);
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      double v = 0.0;
      const char* first = src_.data() + pos_;
      const char* last = src_.data() + src_.size();
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc()) error("malformed number");
      pos_ += static_cast<std::size_t>(ptr - first);
      auto n = std::make_shared<CostExpr::Node>();
      n->op = Op::constant;
      n->value = v;
      return n;
    }
    error("expected number, 'x' or '('");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

double eval(const CostExpr::Node& n, double x) {
  switch (n.op) {
    case Op::constant:
      return n.value;
    case Op::variable:
      return x;
    case Op::add:
      return eval(*n.lhs, x) + eval(*n.rhs, x);
    case Op::sub:
      return eval(*n.lhs, x) - eval(*n.rhs, x);
    case Op::mul:
      return eval(*n.lhs, x) * eval(*n.rhs, x);
    case Op::div:
      return eval(*n.lhs, x) / eval(*n.rhs, x);
    case Op::neg:
      return -eval(*n.lhs, x);
    case Op::pow: {
      double base = eval(*n.lhs, x);
      double r = 1.0;
      for (int i = 0; i < n.exponent; ++i) r *= base;
      return r;
    }
  }
  return 0.0;
}

}  // namespace

CostExpr CostExpr::parse(std::string_view text) {
  Parser p(text);
  return CostExpr(std::string(text), p.parse_all());
}

double CostExpr::operator()(double x) const { return eval(*root_, x); }

}  // namespace sigdyn
