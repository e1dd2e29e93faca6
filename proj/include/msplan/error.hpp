#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace msplan {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument or specification was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed input document; carries the byte offset where parsing stopped.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Covariance matrix could not be factorized even with the maximum jitter.
class SingularKernel : public Error {
 public:
  using Error::Error;
};

/// Training field carries no usable signal (e.g. no vegetation anywhere).
class DegenerateField : public Error {
 public:
  using Error::Error;
};

}  // namespace msplan
