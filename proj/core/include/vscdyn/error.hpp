#pragma once

#include <stdexcept>
#include <string>

namespace vscdyn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad caller input: wrong dimensions, non-finite values, violated preconditions.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Reactive-bond calibration could not satisfy its targets.
class CalibrationError : public Error {
public:
    CalibrationError(const std::string& what, double residual)
        : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// The propagator produced non-finite forces or state.
class IntegrationError : public Error {
public:
    using Error::Error;
};

/// Transition-state search failed (no interior maximum, no convergence).
class SearchError : public Error {
public:
    using Error::Error;
};

/// Configuration text could not be parsed or validated.
class ConfigError : public Error {
public:
    ConfigError(const std::string& what, int line = 0, int column = 0)
        : Error(line > 0 ? what + " at line " + std::to_string(line) + ", column " + std::to_string(column)
                         : what),
          line_(line), column_(column) {}
    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

/// File system failure while reading or writing run artifacts.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace vscdyn
