#pragma once

#include <stdexcept>
#include <string>

namespace multiexec {

/// A caller violated a documented precondition (bad n, bad dimensions, ...).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Configuration document or input file is malformed.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure failed (step-size underflow, lost definiteness, ...).
/// `time()` is the model time at which the failure was detected.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double time)
      : std::runtime_error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace multiexec
