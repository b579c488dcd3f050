#pragma once

#include <stdexcept>
#include <string>

namespace ilmc {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters or configuration (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Mismatched or malformed inputs to a metric or solver.
class InputError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Step size violates the invertibility bound of I + h * Hess U.
class AdmissibilityError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Numerical failure during a solve (CLI exit code 3).
class SolverError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public SolverError {
 public:
  ConvergenceError(const std::string& what, double residual)
      : SolverError(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// I + tau * Hess U was not positive definite.
class CoefficientError : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace ilmc
