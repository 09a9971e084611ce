#pragma once

#include <stdexcept>
#include <string>

namespace bilateral {

// Base of every error thrown by the library. Callers that only care about
// "input problem" vs "numerical problem" can catch SpecError / NumericError.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public NumericError {
 public:
  using NumericError::NumericError;
};

class InvalidInterval : public Error {
 public:
  using Error::Error;
};

class NotBracketed : public NumericError {
 public:
  using NumericError::NumericError;
};

class EmptyConditioning : public Error {
 public:
  using Error::Error;
};

class InfeasibleSpec : public Error {
 public:
  using Error::Error;
};

class SingularDenominator : public NumericError {
 public:
  using NumericError::NumericError;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

// Malformed or invariant-violating JSON spec. `line` is 1-based, 0 if unknown.
class SpecError : public Error {
 public:
  SpecError(const std::string& what, int line, std::string pointer)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line),
        pointer_(std::move(pointer)) {}

  int line() const noexcept { return line_; }
  const std::string& pointer() const noexcept { return pointer_; }

 private:
  int line_;
  std::string pointer_;
};

}  // namespace bilateral
