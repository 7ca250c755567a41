#ifndef LUNGLINE_ERRORS_HPP
#define LUNGLINE_ERRORS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lungline {

// Root of the library's error hierarchy. Domain code catches Error; the CLI
// maps it to exit code 1 (usage problems are reported separately as 2).
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Tensor extents or divisibility constraints violated.
class ShapeError : public Error {
public:
  using Error::Error;
};

// An index (class label, layer id) is out of range.
class IndexError : public Error {
public:
  using Error::Error;
};

// A scalar argument is out of its documented domain.
class ArgumentError : public Error {
public:
  using Error::Error;
};

// An operation was called on an object in the wrong state (e.g. forward on a
// model whose weights were never bound).
class StateError : public Error {
public:
  using Error::Error;
};

// A byte stream does not conform to the expected file format.
class FormatError : public Error {
public:
  using Error::Error;
};

// A stream ended before the format said it should.
class TruncationError : public FormatError {
public:
  TruncationError(const std::string& msg, uint64_t offset)
      : FormatError(msg + " (at offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  uint64_t offset() const { return offset_; }

private:
  uint64_t offset_;
};

// The same tensor name appeared twice in a weight container.
class DuplicateNameError : public FormatError {
public:
  using FormatError::FormatError;
};

// A well-formed file uses a feature outside the supported subset
// (e.g. a palette PNG).
class UnsupportedFormatError : public FormatError {
public:
  using FormatError::FormatError;
};

// Malformed or corrupt image data.
class DecodeError : public FormatError {
public:
  using FormatError::FormatError;
};

// A split specification asks for more records than a class has.
class CapacityError : public Error {
public:
  using Error::Error;
};

// Training configuration inconsistent with the model or data.
class ConfigError : public Error {
public:
  using Error::Error;
};

// Weight binding failed (missing tensors or shape conflicts carry their own
// detail in the message).
class BindError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace lungline

#endif  // LUNGLINE_ERRORS_HPP
