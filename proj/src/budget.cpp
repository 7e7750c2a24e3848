#include "sparsegreedy/budget.hpp"

#include <cctype>
#include <cmath>
#include <memory>

#include "sparsegreedy/errors.hpp"

namespace sparsegreedy {

namespace {

using Fn = std::function<double(double)>;

class Parser {
 public:
  explicit Parser(const std::string& text) : s_(text) {}

  Fn parse() {
    Fn e = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw ConfigurationError("budget expression '" + s_ + "': " + why);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  bool starts_factor() {
    skip();
    if (pos_ >= s_.size()) return false;
    const char c = s_[pos_];
    return std::isalnum(static_cast<unsigned char>(c)) || c == '(' || c == '.';
  }

  Fn expr() {
    Fn lhs = term();
    for (;;) {
      if (eat('+')) {
        lhs = [a = lhs, b = term()](double m) { return a(m) + b(m); };
      } else if (eat('-')) {
        lhs = [a = lhs, b = term()](double m) { return a(m) - b(m); };
      } else {
        return lhs;
      }
    }
  }

  Fn term() {
    Fn lhs = unary();
    for (;;) {
      if (eat('*')) {
        lhs = [a = lhs, b = unary()](double m) { return a(m) * b(m); };
      } else if (eat('/')) {
        lhs = [a = lhs, b = unary()](double m) { return a(m) / b(m); };
      } else if (starts_factor()) {
        lhs = [a = lhs, b = unary()](double m) { return a(m) * b(m); };
      } else {
        return lhs;
      }
    }
  }

  Fn unary() {
    if (eat('-')) return [a = unary()](double m) { return -a(m); };
    return factor();
  }

  Fn factor() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    const char c = s_[pos_];
    if (eat('(')) {
      Fn e = expr();
      if (!eat(')')) fail("missing ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      const double v = std::stod(s_.substr(pos_), &used);
      pos_ += used;
      return [v](double) { return v; };
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t end = pos_;
      while (end < s_.size() && std::isalnum(static_cast<unsigned char>(s_[end]))) ++end;
      const std::string name = s_.substr(pos_, end - pos_);
      pos_ = end;
      if (name == "m") return [](double m) { return m; };
      double (*fn)(double) = nullptr;
      if (name == "ceil") fn = [](double x) { return std::ceil(x); };
      else if (name == "floor") fn = [](double x) { return std::floor(x); };
      else if (name == "log" || name == "ln") fn = [](double x) { return std::log(x); };
      else if (name == "log2") fn = [](double x) { return std::log2(x); };
      else if (name == "sqrt") fn = [](double x) { return std::sqrt(x); };
      else fail("unknown name '" + name + "'");
      if (!eat('(')) fail("expected '(' after " + name);
      Fn arg = expr();
      if (!eat(')')) fail("missing ')'");
      return [fn, arg](double m) { return fn(arg(m)); };
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

BudgetExpression::BudgetExpression(std::string text) : text_(std::move(text)) {
  if (text_.empty()) throw ConfigurationError("budget expression is empty");
  eval_ = Parser(text_).parse();
}

std::size_t BudgetExpression::evaluate(std::size_t m) const {
  const double v = eval_(static_cast<double>(m));
  if (!std::isfinite(v)) throw ConfigurationError("budget expression '" + text_ + "' is not finite at m=" +
                                                  std::to_string(m));
  const double rounded = std::round(v);
  const double out = std::abs(v - rounded) <= 1e-9 ? rounded : std::floor(v);
  return out <= 0.0 ? 0 : static_cast<std::size_t>(out);
}

}  // namespace sparsegreedy
