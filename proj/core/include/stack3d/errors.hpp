#pragma once

#include <stdexcept>
#include <string>

namespace stack3d {

// Input text could not be parsed; carries the 1-based source line.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Bad or missing configuration. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Model or runtime failure (infeasible instance, solver divergence, I/O).
// The CLI maps this to exit code 3.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace stack3d
