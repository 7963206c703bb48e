#pragma once

#include <stdexcept>
#include <string>

namespace osgood {

/// Argument outside the mathematical domain of an operation (negative time,
/// negative input to f, empty subset, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Source term violating the Osgood condition: the integral of 1/f over
/// [1, inf) diverges, so the scalar ODE never blows up.
class NonOsgoodError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Source term violating convexity, monotonicity or f(0) = 0.
class InvalidSourceError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input file or configuration. `line` is 1-based, 0 when unknown.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line == 0 ? what : what + " (line " + std::to_string(line) + ")"),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace osgood
