#pragma once

#include <stdexcept>
#include <string>

namespace factor_order {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyInputError : public Error {
 public:
  EmptyInputError() : Error("empty input matrix") {}
};

class RaggedRowsError : public Error {
 public:
  RaggedRowsError(long row, long expected, long got)
      : Error("ragged input: row " + std::to_string(row) + " has " + std::to_string(got) +
              " columns, expected " + std::to_string(expected)),
        row(row), expected(expected), got(got) {}
  long row, expected, got;
};

class NonFiniteError : public Error {
 public:
  NonFiniteError(long row, long col)
      : Error("non-finite entry at (" + std::to_string(row) + ", " + std::to_string(col) + ")"),
        row(row), col(col) {}
  long row, col;
};

class InsufficientColumnsError : public Error {
 public:
  InsufficientColumnsError(long t_used, long tau, long n_cols)
      : Error("need t_used + tau <= columns: " + std::to_string(t_used) + " + " +
              std::to_string(tau) + " > " + std::to_string(n_cols)),
        t_used(t_used), tau(tau), n_cols(n_cols) {}
  long t_used, tau, n_cols;
};

class ConvergenceFailureError : public Error {
 public:
  using Error::Error;
};

// Evaluation point lies inside (or on an atom of) the relevant spectral support.
class InsideSupportError : public Error {
 public:
  explicit InsideSupportError(double where)
      : Error("evaluation point " + std::to_string(where) + " lies inside the support"),
        where(where) {}
  double where;
};

// c == 1 degenerates the edge cubic and the noise-variance window.
class AspectRatioOneError : public Error {
 public:
  AspectRatioOneError() : Error("aspect ratio c = 1 is degenerate here; supply sigma2 explicitly") {}
};

class EmptyWindowError : public Error {
 public:
  explicit EmptyWindowError(const std::string& what) : Error("empty eigenvalue window: " + what) {}
};

class NonPositiveLambdaError : public Error {
 public:
  explicit NonPositiveLambdaError(double lambda)
      : Error("factor strength must be positive, got " + std::to_string(lambda)), lambda(lambda) {}
  double lambda;
};

// File-coordinate diagnostics are 1-based.
class CsvParseError : public Error {
 public:
  CsvParseError(long row, long col, const std::string& detail)
      : Error("row " + std::to_string(row) + ", column " + std::to_string(col) + ": " + detail),
        row(row), col(col) {}
  long row, col;
};

}  // namespace factor_order
