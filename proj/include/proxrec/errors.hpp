#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace proxrec {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& message) : std::runtime_error(message) {}
};

/// A value violates a domain invariant (rating out of scale, negative
/// duration, bad parameter).
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message) : Error(message) {}
};

/// Malformed input file. `line()` is 1-based and counts the header row.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : ValidationError(file + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Invalid experiment configuration (unknown key, wrong type, bad value).
class ConfigError : public ValidationError {
 public:
  explicit ConfigError(const std::string& message) : ValidationError(message) {}
};

/// Wire-level violation: malformed payload, oversized advertisement or payload.
class ProtocolError : public Error {
 public:
  explicit ProtocolError(const std::string& message) : Error(message) {}
};

/// The queried user has no ratings in the store.
class ColdUserError : public Error {
 public:
  explicit ColdUserError(const std::string& message) : Error(message) {}
};

}  // namespace proxrec
