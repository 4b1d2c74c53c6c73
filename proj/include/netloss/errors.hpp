#pragma once

#include <stdexcept>
#include <string>

namespace netloss {

// Base of every error raised by the library. The CLI maps the subclasses
// onto process exit codes (see tools/netloss_cli.cpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input: wrong shape, out-of-range parameter, malformed experiment file.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Inconsistent combination of otherwise valid parts, e.g. a selective
// attacker on an independent channel.
class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// A numerical routine could not deliver its contract (non-PD pivot,
// singular system, Jacobi did not converge).
class NumericError : public Error {
 public:
  using Error::Error;
};

// API called out of protocol (e.g. channel stepped with a non-increasing index).
class UsageError : public Error {
 public:
  using Error::Error;
};

class InfeasibleDesign : public Error {
 public:
  InfeasibleDesign(const std::string& what, double best_exponent)
      : Error(what), best_exponent_(best_exponent) {}

  // Lowest (1-rho)ln(beta) + rho ln(phi_min) seen over candidates that
  // satisfied the closed-loop contraction condition.
  [[nodiscard]] double best_exponent() const noexcept { return best_exponent_; }

 private:
  double best_exponent_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace netloss
