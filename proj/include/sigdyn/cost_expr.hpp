// Copyright 2026 The sigdyn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace sigdyn {

/// A cost expression in one variable `x`.
///
/// Grammar (usual precedence, left-associative binary operators):
///
///     expr   := term (('+' | '-') term)*
///     term   := unary (('*' | '/') unary)*
///     unary  := '-' unary | power
///     power  := atom ('^' integer)?
///     atom   := number | 'x' | '(' expr ')'
///
/// Exponents are restricted to non-negative integer literals. The parsed tree
/// is immutable and can be shared across threads.
class CostExpr {
 public:
  struct Node;

  static CostExpr parse(std::string_view text);

  double operator()(double x) const;
  const std::string& text() const noexcept { return text_; }

 private:
  CostExpr(std::string text, std::shared_ptr<const Node> root)
      : text_(std::move(text)), root_(std::move(root)) {}

  std::string text_;
  std::shared_ptr<const Node> root_;
};

}  // namespace sigdyn
