#pragma once

#include <stdexcept>
#include <string>

namespace orthonewton {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: non-finite entries, shape mismatches, asymmetric matrices.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A factorization could not be completed (rank deficiency, loss of definiteness).
class FactorizationError : public Error {
 public:
  FactorizationError(const std::string& what, long column)
      : Error(what), column_(column) {}
  long column() const noexcept { return column_; }

 private:
  long column_;
};

/// Logarithm requested for subspaces with a principal angle at pi/2.
class CutLocusError : public Error {
 public:
  using Error::Error;
};

/// Resolvent of a GA-type retraction is numerically singular.
class StepTooLargeError : public Error {
 public:
  using Error::Error;
};

/// Hessian-based step requested along a direction of zero curvature.
class DegenerateCurvatureError : public Error {
 public:
  using Error::Error;
};

/// A precondition on an argument does not hold (e.g. non-descent direction).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Experiment configuration rejected by the schema.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::string field = {}, long line = 0)
      : Error(what), field_(std::move(field)), line_(line) {}
  const std::string& field() const noexcept { return field_; }
  long line() const noexcept { return line_; }

 private:
  std::string field_;
  long line_;
};

}  // namespace orthonewton
