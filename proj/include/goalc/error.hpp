#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace goalc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed input text. `position` is a byte offset into the input.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " (at byte " + std::to_string(position) + ")"), position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Input that parsed but does not describe something usable (bad reference, bad shape).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An expression was evaluated without a value for one of its parameters.
class MissingBinding : public DomainError {
 public:
  explicit MissingBinding(const std::string& name)
      : DomainError("missing binding for parameter '" + name + "'"), name_(name) {}

  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

/// A parameter was bound outside its domain (e.g. a context bound to 0.5).
class DomainViolation : public DomainError {
 public:
  DomainViolation(const std::string& name, double value, const std::string& expected)
      : DomainError("parameter '" + name + "' bound to " + std::to_string(value) + ", expected " +
                    expected),
        name_(name) {}

  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

}  // namespace goalc
