#pragma once

#include <stdexcept>
#include <string>

namespace bsafe {

// Base for all library errors. The CLI maps the subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments or an invalid combination of options (exit code 2).
class UsageError : public Error {
 public:
  using Error::Error;
};

// Malformed input file; carries the 0-based data row when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, long row = -1) : Error(what), row_(row) {}
  long row() const { return row_; }

 private:
  long row_;
};

// Input that parses but violates a domain invariant (exit code 3).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Factorization failure, non-convergence and similar (exit code 4).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace bsafe
