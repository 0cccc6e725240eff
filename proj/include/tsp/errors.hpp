#pragma once

#include <stdexcept>
#include <string>

namespace tsp {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid configuration value (bad fraction, non-positive rate, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Malformed input file content; carries a line number when known.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what, long line = -1)
        : Error(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what),
          line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

// Binary/CSV payload does not match its header or expected layout.
class FormatError : public Error {
public:
    using Error::Error;
};

// Dimension or index mismatch between operands.
class ShapeError : public Error {
public:
    using Error::Error;
};

// A configured budget (edge count, simplex count) was exceeded.
class CapacityError : public Error {
public:
    using Error::Error;
};

// An iterative solver hit its iteration cap before reaching tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

}  // namespace tsp
