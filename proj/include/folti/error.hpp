#pragma once

#include <stdexcept>
#include <string>

namespace folti {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  /// Short machine-readable category, used by the CLI's JSON error output.
  virtual const char* kind() const noexcept { return "error"; }
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "domain"; }
};

class DimensionError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "dimension"; }
};

/// A linear solve failed. Carries either a condition estimate (direct
/// factorizations) or the last relative residual (iterative methods).
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double condition_estimate,
              double residual = 0.0, int iterations = 0)
      : Error(what),
        condition_estimate_(condition_estimate),
        residual_(residual),
        iterations_(iterations) {}

  const char* kind() const noexcept override { return "solver"; }
  double condition_estimate() const noexcept { return condition_estimate_; }
  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double condition_estimate_;
  double residual_;
  int iterations_;
};

/// The regression design does not determine the parameters uniquely.
class IdentifiabilityError : public Error {
 public:
  IdentifiabilityError(const std::string& what, int null_space_dim)
      : Error(what), null_space_dim_(null_space_dim) {}
  const char* kind() const noexcept override { return "identifiability"; }
  int null_space_dim() const noexcept { return null_space_dim_; }

 private:
  int null_space_dim_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "config"; }
};

class IoError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "io"; }
};

}  // namespace folti
