#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cerebellum {

/// Malformed or out-of-contract input. Maps to CLI exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Config parse or validation failure with the offending location.
class ConfigError : public InputError {
 public:
  ConfigError(std::string field, std::size_t line, const std::string& what)
      : InputError(format(field, line, what)), field_(std::move(field)), line_(line) {}

  const std::string& field() const { return field_; }
  /// 1-based line, 0 when unknown.
  std::size_t line() const { return line_; }

 private:
  static std::string format(const std::string& field, std::size_t line, const std::string& what) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (!field.empty()) out += field + ": ";
    return out + what;
  }

  std::string field_;
  std::size_t line_;
};

/// Dataset / weight store / config hashes disagree. Exit code 3.
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure: non-convergence, divergence, non-finite values. Exit code 4.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, std::size_t iterations)
      : NumericalError(what + " after " + std::to_string(iterations) + " iterations"),
        iterations_(iterations) {}
  std::size_t iterations() const { return iterations_; }

 private:
  std::size_t iterations_;
};

}  // namespace cerebellum
