#pragma once

#include <stdexcept>
#include <string>

namespace sqladder {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters or inconsistent inputs (maps to CLI exit code 2).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Sideband ratio Omega_b >= Omega_r, i.e. no normalizable squeezed basis.
class RatioError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Repump requested while executing in closed-system mode.
class ModeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, int line, int column)
      : ValidationError("line " + std::to_string(line) + ", column " +
                        std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// Numerical failures (maps to CLI exit code 3).
class NumericalError : public Error {
 public:
  using Error::Error;
};

// State weight leaks into the guard band of the truncated Fock space.
class TruncationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class IntegrationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class FitError : public NumericalError {
 public:
  FitError(const std::string& what, double best_residual = -1.0)
      : NumericalError(what), best_residual_(best_residual) {}
  double best_residual() const { return best_residual_; }

 private:
  double best_residual_;
};

class IllConditionedError : public NumericalError {
 public:
  IllConditionedError(const std::string& what, double condition_number)
      : NumericalError(what), condition_number_(condition_number) {}
  double condition_number() const { return condition_number_; }

 private:
  double condition_number_;
};

}  // namespace sqladder
