#pragma once

#include <stdexcept>
#include <string>

namespace spmtc {

// Error taxonomy shared by every module. Callers dispatch on the type,
// not on message text.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Matrix/vector shapes do not line up.
struct DimensionError : Error {
  using Error::Error;
};

// A value fails its precondition (non-symmetric input, undersized sample, ...).
struct InvalidInputError : Error {
  using Error::Error;
};

// A configuration field is out of its documented range.
struct InvalidConfigError : Error {
  using Error::Error;
};

// No example carries positive weight where at least one is required.
struct DegenerateWeightsError : Error {
  using Error::Error;
};

// An operation was asked to work on a task with no examples/losses.
struct EmptyTaskError : Error {
  using Error::Error;
};

// File system failure; message carries the path.
struct IoError : Error {
  using Error::Error;
};

// File exists but its content violates the declared format.
struct FormatError : Error {
  using Error::Error;
};

// A state invariant (e.g. nonnegativity of a partition matrix) was violated.
struct InvariantViolationError : Error {
  using Error::Error;
};

}  // namespace spmtc
