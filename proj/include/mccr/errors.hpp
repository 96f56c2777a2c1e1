#pragma once

#include <stdexcept>
#include <string>

namespace mccr {

/// Bad input: parameters out of range, malformed files, shape mismatches.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine could not reach its target accuracy or hit a
/// degenerate configuration. `achieved()` carries the best estimate or
/// tolerance reached before giving up (NaN when not meaningful).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, double achieved = 0.0 / 0.0)
      : std::runtime_error(what), achieved_(achieved) {}

  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

/// Too many per-record failures in an experiment for its summary to be trusted.
class DegradationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mccr
