#pragma once

#include <stdexcept>
#include <string>

namespace clsim {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or malformed input (geometry, flags, config files).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Requested dimension cannot hold the requested geometry.
class DimensionError : public ValidationError {
public:
    DimensionError(const std::string& what, int min_dimension)
        : ValidationError(what), min_dimension_(min_dimension) {}
    int min_dimension() const noexcept { return min_dimension_; }

private:
    int min_dimension_;
};

/// Rehearsal quota exceeds the samples kept for a task.
class CapacityError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Search range for an extremum is empty.
class RangeError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Sample count sits within one of the dimension, where the closed forms
/// have vanishing denominators and the trainer refuses by default.
class BoundaryRegimeError : public Error {
public:
    using Error::Error;
};

/// Closed-form expectation requested for a Boundary configuration.
class UndefinedTheoryError : public BoundaryRegimeError {
public:
    using BoundaryRegimeError::BoundaryRegimeError;
};

/// Metric undefined at this task index (memory error at t = 1).
class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

/// Gram or design matrix numerically singular.
class RankDeficiencyError : public Error {
public:
    RankDeficiencyError(const std::string& what, double condition_estimate)
        : Error(what), condition_estimate_(condition_estimate) {}
    double condition_estimate() const noexcept { return condition_estimate_; }

private:
    double condition_estimate_;
};

/// Every point of a sweep was skipped.
class EmptySweepError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

}  // namespace clsim
