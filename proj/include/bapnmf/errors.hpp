#pragma once

#include <stdexcept>
#include <string>

namespace bapnmf {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function or distribution.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Numerical routine failed to reach the requested accuracy.
class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& what, double best_estimate)
      : Error(what), best_estimate_(best_estimate) {}
  double best_estimate() const { return best_estimate_; }

 private:
  double best_estimate_;
};

/// Matrix factorization failed (e.g. a matrix that should be PD is not).
class DecompositionError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent dimensions or labels between related objects.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Input that is well-formed but cannot be fitted (all zeros, zero norms, ...).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file or configuration.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line = 0)
      : Error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Data-level problem: missing files, no overlap between tables, etc.
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace bapnmf
