#pragma once

#include <stdexcept>
#include <string>

namespace sspcast {

/// Precondition violated by a caller-supplied value (shape, ordering, range).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A non-finite number reached a numeric kernel.
class NumericError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed dataset files (profile CSV, manifest).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ModelFormatFault {
  bad_magic,
  version_mismatch,
  truncated,
  trailing_bytes,
  checksum_mismatch,
  shape_inconsistent,
};

const char* to_string(ModelFormatFault fault) noexcept;

/// Raised by load_model; the fault tells the caller what went wrong.
class ModelFormatError : public std::runtime_error {
 public:
  ModelFormatError(ModelFormatFault fault, const std::string& what)
      : std::runtime_error(std::string(to_string(fault)) + ": " + what), fault_(fault) {}

  ModelFormatFault fault() const noexcept { return fault_; }

 private:
  ModelFormatFault fault_;
};

}  // namespace sspcast
