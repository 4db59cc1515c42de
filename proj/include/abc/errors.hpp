#pragma once

#include <stdexcept>
#include <string>

namespace abc {

/// Bad input values passed to an operation (empty batch, zero episodes, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Inconsistent run or domain configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed domain config text; carries the 1-based line number.
class ParseError : public ConfigError {
 public:
  ParseError(int line, const std::string& what)
      : ConfigError("line " + std::to_string(line) + ": " + what), line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// step() called on a state whose episode already reached the horizon.
class EpisodeOverError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Enumerated model exceeds the configured table cap.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace abc
