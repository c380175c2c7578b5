#pragma once

#include <stdexcept>
#include <string>

namespace rcgan {

// Base class for every error raised by the library. The CLI maps the
// concrete subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes that do not line up (batch width, layer chaining, upstream size).
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Arguments that violate a documented precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// NaN/Inf losses, infeasible solver input, non-convergence.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Files that cannot be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed file content (CSV rows, schema lines, checkpoints).
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace rcgan
