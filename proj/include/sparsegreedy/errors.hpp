#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace sparsegreedy {

/// Shape mismatch between a vector and the space / dictionary it is used with.
class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid experiment, grid or dictionary configuration.
class ConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exhaustive enumeration would exceed the configured cap.
class EnumerationCapError : public ConfigurationError {
 public:
  using ConfigurationError::ConfigurationError;
};

/// An iterative solver ran out of budget before reaching its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, Eigen::VectorXd last_iterate, double gradient_norm)
      : std::runtime_error(what), last_iterate_(std::move(last_iterate)), gradient_norm_(gradient_norm) {}

  const Eigen::VectorXd& last_iterate() const noexcept { return last_iterate_; }
  double gradient_norm() const noexcept { return gradient_norm_; }

 private:
  Eigen::VectorXd last_iterate_;
  double gradient_norm_;
};

}  // namespace sparsegreedy
