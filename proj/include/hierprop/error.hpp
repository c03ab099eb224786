// Error types shared by all hierprop modules. The CLI maps these onto
// process exit codes (invalid input / data problems -> 2, solver
// non-convergence -> 3).
#pragma once

#include <stdexcept>
#include <string>

namespace hierprop {

class InvalidInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown by hierarchy loading when the parent->child edges contain a cycle.
// The message names one offending cycle.
class CyclicHierarchyError : public InvalidInputError {
 public:
  using InvalidInputError::InvalidInputError;
};

// AUC-style metrics are undefined without both classes present.
class UndefinedMetricError : public InvalidInputError {
 public:
  using InvalidInputError::InvalidInputError;
};

// Dense oracle assembly refuses instances above its size guard.
class SizeError : public InvalidInputError {
 public:
  using InvalidInputError::InvalidInputError;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Iterative solver failed to reach its tolerance. `value()` carries the
// final relative residual (CG) or the last sweep's max change (block sweeps).
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& msg, double value)
      : std::runtime_error(msg), value_(value) {}
  double value() const { return value_; }

 private:
  double value_;
};

}  // namespace hierprop
