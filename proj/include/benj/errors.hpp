#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace benj {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Model or generator parameters outside their admissible range.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Grid or truncation too small for the requested bandwidth.
class BandwidthError : public Error {
public:
    using Error::Error;
};

/// Fields with different bandwidth or domain combined in one operation.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Malformed input to a utility (empty series, nonpositive errors, ...).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Time integration produced nonfinite values or runaway growth.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, double time)
        : Error(what + " at t = " + std::to_string(time)), time_(time) {}

    double time() const noexcept { return time_; }

private:
    double time_;
};

/// Fixed-point iteration did not reach its tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, std::vector<double> residuals)
        : Error(what), residuals_(std::move(residuals)) {}

    const std::vector<double>& residual_history() const noexcept { return residuals_; }

private:
    std::vector<double> residuals_;
};

/// The operator (c + L) is not positive on some retained mode.
class SpectrumError : public Error {
public:
    SpectrumError(const std::string& what, int mode) : Error(what), mode_(mode) {}

    int mode() const noexcept { return mode_; }

private:
    int mode_;
};

/// Malformed text input (config document, snapshot file). line() is 1-based,
/// 0 when unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line = 0)
        : Error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

}  // namespace benj
