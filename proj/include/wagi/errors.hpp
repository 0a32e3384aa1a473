#pragma once

#include <stdexcept>
#include <string>

namespace wagi {

/// Input tensors disagree in shape (channel, height or width).
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A spatial dimension is odd, not a power of two, or not divisible by the
/// required factor. The message names the offending axis.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A scalar argument is out of its admissible range.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Base of every parse failure of a serialized artifact.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedHeaderError : public FormatError {
 public:
  using FormatError::FormatError;
};

class TruncatedPayloadError : public FormatError {
 public:
  using FormatError::FormatError;
};

class UnsupportedMaxvalError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// Recognised but unsupported variant, e.g. ASCII or bitmap PNM.
class UnsupportedFormatError : public FormatError {
 public:
  using FormatError::FormatError;
};

class BadMagicError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// Declared dimensions overflow or disagree with the payload length.
class DimensionOverflowError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wagi
