#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vdm {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller supplied an argument that violates an operation's precondition.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A configured size guard (partition order, letter count, dimension) was exceeded.
class ResourceLimitError : public Error {
 public:
  using Error::Error;
};

/// The word handed to a specialised operation does not have the required shape.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Interpolated values failed exact verification; the interval hides a breakpoint.
class VerificationError : public Error {
 public:
  using Error::Error;
};

/// Text input could not be parsed; `position()` is a 0-based character offset.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " at position " + std::to_string(position)), detail_(what), position_(position) {}

  std::size_t position() const noexcept { return position_; }
  /// The message without the position suffix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string detail_;
  std::size_t position_;
};

}  // namespace vdm
