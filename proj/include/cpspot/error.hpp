#pragma once

#include <stdexcept>
#include <string>

namespace cpspot {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

// Inconsistent or unsupported configuration (caps, knobs, config files).
class ConfigurationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Atom position or ray geometry inconsistent with the obstacle.
class GeometryError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

// Iterative scheme stopped before reaching its tolerance. Carries the best
// value available at the point of failure.
class ConvergenceError : public std::runtime_error {
public:
  ConvergenceError(const std::string &what, double partial)
      : std::runtime_error(what), partial_(partial) {}
  double partial() const noexcept { return partial_; }

private:
  double partial_;
};

class BracketError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace cpspot
