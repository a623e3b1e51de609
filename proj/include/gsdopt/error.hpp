#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace gsdopt {

/// Base class for every error raised by the design engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The quadrature could not reach the probability tolerance, even after refinement.
class GridResolutionError : public Error {
 public:
  using Error::Error;
};

/// A root finder or fixed-point iteration failed to converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// The requested design cannot exist (e.g. futility bound crossing the efficacy bound).
class InfeasibleDesignError : public Error {
 public:
  using Error::Error;
};

/// A configuration document does not match the schema. `field` names the offending
/// entry as a dotted path; `line` is set for syntax errors.
class SchemaError : public Error {
 public:
  SchemaError(std::string field, const std::string& message, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + message
                       : "field " + field + ": " + message),
        field_(std::move(field)),
        line_(line) {}

  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  std::string field_;
  int line_ = 0;
};

/// Non-fatal condition attached to a result, e.g. a capped boundary.
struct Warning {
  std::string code;
  std::string message;
  int stage = -1;  // zero-based, -1 when not stage specific
};

}  // namespace gsdopt
