#pragma once

#include <stdexcept>
#include <string>

namespace rdsim {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Mismatched array lengths or operator dimensions.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Requested configuration is outside what the engine supports.
class UnsupportedError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Iterative eigensolver did not reach the requested residual.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// Time step collapsed below the smallest admissible size.
class StiffnessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user configuration, detected before any numerical work.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace rdsim
