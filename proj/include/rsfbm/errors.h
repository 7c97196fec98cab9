#pragma once

#include <stdexcept>
#include <string>

namespace rsfbm {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A violated precondition that names the constraint (e.g. "nu/rho - 1 < delta/2").
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Series or quadrature failed to converge. Carries the last estimate.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(const std::string& what, double partial)
      : std::runtime_error(what), partial_(partial) {}
  double partial_estimate() const noexcept { return partial_; }

 private:
  double partial_;
};

/// Operation requested on a model variant that does not support it.
class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Matrix factorization or other numerical kernel failed.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rsfbm
