#pragma once

#include <stdexcept>
#include <string>

namespace modamp {

/// Invalid arguments: out-of-range sizes, mismatched bases, malformed specs.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative solver stopped before reaching its residual target.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// A dense path was requested above its configured dimension cap.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// The propagator could not meet its error budget within its limits.
class AccuracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace modamp
