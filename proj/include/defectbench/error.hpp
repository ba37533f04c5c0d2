#pragma once

#include <stdexcept>
#include <string>

namespace defectbench {

// Input text could not be parsed. Carries the 1-based source line.
class ParseError : public std::runtime_error {
public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}

  int line() const { return line_; }

private:
  int line_;
};

// Precondition violation on an operation's inputs.
class InvalidInput : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Malformed benchmark configuration.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace defectbench
