#pragma once

#include <stdexcept>
#include <string>

namespace nhf {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: malformed config, out-of-range parameter, invalid geometry.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Requested size exceeds what a dense method can hold in memory.
class CapacityError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Operation is not defined for the given parameter region.
class UnsupportedError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A numerical routine could not produce a trustworthy result.
class NumericalBreakdown : public Error {
 public:
  explicit NumericalBreakdown(const std::string& what, double condition = 0.0)
      : Error(what), condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

/// The evolved Gaussian state collapsed to rank < L.
class DegenerateEvolution : public NumericalBreakdown {
 public:
  using NumericalBreakdown::NumericalBreakdown;
};

/// Subsystem correlation spectrum left [-1, 1].
class PurityViolation : public NumericalBreakdown {
 public:
  using NumericalBreakdown::NumericalBreakdown;
};

class IntegrationFailure : public NumericalBreakdown {
 public:
  IntegrationFailure(const std::string& what, double last_good_time)
      : NumericalBreakdown(what), last_good_time_(last_good_time) {}
  double last_good_time() const noexcept { return last_good_time_; }

 private:
  double last_good_time_;
};

class FitError : public NumericalBreakdown {
 public:
  using NumericalBreakdown::NumericalBreakdown;
};

}  // namespace nhf
