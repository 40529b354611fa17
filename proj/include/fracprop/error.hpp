// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fracprop {

// Failure classes. The CLI maps them onto distinct exit codes.
enum class ErrorKind { Config, Io, Numeric };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Invalid parameter or precondition on caller-supplied values.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorKind::Config, what) {}
};

class ShapeError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

class ParseError : public IoError {
 public:
  ParseError(const std::string& source, std::size_t line,
             const std::string& what)
      : IoError(source + ":" + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error(ErrorKind::Numeric, what) {}
};

}  // namespace fracprop
