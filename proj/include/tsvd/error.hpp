#pragma once

#include <stdexcept>
#include <string>

namespace tsvd {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "error"; }
};

/// Bad input: wrong dimension, parameter out of range, malformed file.
class InvalidArgument : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "invalid_argument"; }
};

class DimensionMismatch : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
    const char* kind() const noexcept override { return "dimension_mismatch"; }
};

/// The stochastic error needs the retained noise draw of a simulated observation.
class MissingNoise : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "missing_noise"; }
};

class TruncatedStream : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "truncated_stream"; }
};

class ConfigError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "config_error"; }
};

/// Iterative numerics that did not reach the requested accuracy.
class NumericError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "numeric_error"; }
};

class RankDeficiency : public NumericError {
public:
    using NumericError::NumericError;
    const char* kind() const noexcept override { return "rank_deficiency"; }
};

/// Quadrature could not certify the requested accuracy; carries the best estimate.
class AccuracyError : public NumericError {
public:
    AccuracyError(const std::string& what, double estimate, double achieved)
        : NumericError(what), estimate_(estimate), achieved_(achieved) {}
    const char* kind() const noexcept override { return "accuracy_error"; }
    double estimate() const noexcept { return estimate_; }
    double achieved_accuracy() const noexcept { return achieved_; }

private:
    double estimate_;
    double achieved_;
};

}  // namespace tsvd
