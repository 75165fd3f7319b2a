#pragma once

#include <stdexcept>
#include <string>

namespace pnsr {

// Every exception thrown by the library derives from Error. The concrete type
// tells callers (notably the CLI) how to classify the failure.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument: bad dimensions, shape mismatch, unsupported scale.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// An operation needed at least one valid pixel / point / sample and got none.
class EmptyInputError : public Error {
 public:
  using Error::Error;
};

/// Object is not in a state that permits the operation (e.g. missing normalization).
class StateError : public Error {
 public:
  using Error::Error;
};

/// Value outside the representable range of a format or type.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Malformed file contents. Carries the byte offset at which parsing failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  explicit FormatError(const std::string& what) : Error(what), offset_(0) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class UnsupportedVersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values appeared during a numeric computation.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace pnsr
