#pragma once

#include <cstddef>
#include <functional>
#include <string>

namespace sparsegreedy {

/// Iteration budget φ(m)·m written over the variable m, e.g. "m",
/// "4m", "m*ceil(log(m+1))". Supports + - * /, parentheses, implicit
/// multiplication, and ceil, floor, log (natural), log2, sqrt.
class BudgetExpression {
 public:
  explicit BudgetExpression(std::string text);

  const std::string& text() const noexcept { return text_; }
  double value(double m) const { return eval_(m); }
  /// Integer budget: value rounded when within 1e-9 of an integer, else floored; never negative.
  std::size_t evaluate(std::size_t m) const;

 private:
  std::string text_;
  std::function<double(double)> eval_;
};

}  // namespace sparsegreedy
