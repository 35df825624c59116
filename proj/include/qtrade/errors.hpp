#pragma once

#include <stdexcept>

namespace qtrade {

/// Raised when an input violates a documented precondition (bad dims,
/// non-Hermitian matrix, q out of range, ...).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a computation produces a non-finite value or fails to
/// reach a numerically meaningful result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qtrade
