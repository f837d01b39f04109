#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lpeval {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or parameters. Carries a dotted field path when known.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::string field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Malformed input data. `line` is 1-based, 0 when not tied to a line.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A predictor was asked to score a pair it cannot score (u == v, unknown node).
class InvalidPairError : public Error {
 public:
  using Error::Error;
};

/// A metric has no defined value for the given input (e.g. one class only).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace lpeval
