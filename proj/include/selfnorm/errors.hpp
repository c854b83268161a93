#pragma once

#include <stdexcept>
#include <string>

namespace selfnorm {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-side contract was violated (e.g. z <= z*, bad parameters).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A tilt vector lies on or outside the boundary of the cumulant domain.
class DomainError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// The bivariate jump (X, u(X)) is supported on a line; the non-degenerate
/// machinery does not apply and the two-point routines should be used.
class DegeneracyError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// A hypothesis of the exact-asymptotics regime does not hold.
class RegimeError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// A numerical routine failed to reach its tolerance.
class NumericFailure : public Error {
 public:
  NumericFailure(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Malformed or out-of-schema configuration input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace selfnorm
