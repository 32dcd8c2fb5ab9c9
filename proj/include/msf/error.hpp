#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace msf {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A scalar parameter is outside its admissible range.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// Arguments are inconsistent with each other (basis mismatch, wrong sizes).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An operator violates a structural requirement (e.g. not negative definite).
class InvalidOperator : public Error {
 public:
  using Error::Error;
};

/// A computation produced non-finite values or failed a residual check.
class NumericFailure : public Error {
 public:
  using Error::Error;
};

/// The requested configuration is mathematically outside what is implemented.
class UnsupportedConfiguration : public Error {
 public:
  using Error::Error;
};

/// Too few samples for a statistical comparison.
class InsufficientSamples : public Error {
 public:
  using Error::Error;
};

/// A trajectory exceeded the blow-up cap or became non-finite.
class DivergenceError : public NumericFailure {
 public:
  DivergenceError(const std::string& what, std::int64_t step)
      : NumericFailure(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::int64_t step() const { return step_; }

 private:
  std::int64_t step_;
};

}  // namespace msf
