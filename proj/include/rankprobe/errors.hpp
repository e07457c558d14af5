#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rankprobe {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid law, profile or parameter set supplied by the user.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the operation's mathematical domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A geometric construction has no valid answer for this instance.
class DegenerateInstanceError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// The request would exceed a combinatorial or sampling budget.
class ResourceError : public Error {
 public:
  using Error::Error;
};

class EstimationError : public Error {
 public:
  using Error::Error;
};

/// Non-finite or malformed numeric input.
class InputError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace rankprobe
