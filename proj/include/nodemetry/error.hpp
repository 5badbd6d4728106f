#pragma once

#include <stdexcept>
#include <string>

namespace nodemetry {

// Two families: ValidationError for bad arguments or inconsistent inputs,
// IoError for anything touching files or their encoding. The CLI maps them
// to exit codes 1 and 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class RangeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class GridMismatchError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EmptyInputError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class MappingError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class CapacityError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class FormatError : public IoError {
 public:
  using IoError::IoError;
};

class UnsupportedTypeError : public FormatError {
 public:
  UnsupportedTypeError(const std::string& what, int code) : FormatError(what), code_(code) {}
  int code() const noexcept { return code_; }

 private:
  int code_;
};

class SizeMismatchError : public FormatError {
 public:
  SizeMismatchError(const std::string& what, std::size_t expected, std::size_t actual)
      : FormatError(what), expected_(expected), actual_(actual) {}
  std::size_t expected() const noexcept { return expected_; }
  std::size_t actual() const noexcept { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

}  // namespace nodemetry
