#pragma once

#include <stdexcept>
#include <string>

namespace collapse {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter or input violates an operation's precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An algorithm failed to deliver its accuracy contract (non-convergence,
/// guard violation, indefinite spectrum, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Envelope fit could not be formed from the supplied trace window.
class FitError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace collapse
