#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace jumpctl {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed model or config document. Line/column are 1-based, 0 when unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
        : Error(what), line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Problem data failed admissibility checks; what() lists every violation.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Fixed-point iteration hit its iteration cap.
class NonConvergenceError : public Error {
public:
    NonConvergenceError(const std::string& what, std::size_t iterations, double residual)
        : Error(what), iterations_(iterations), residual_(residual) {}

    std::size_t iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    std::size_t iterations_;
    double residual_;
};

/// Two objects defined on incompatible time grids or index sets.
class GridMismatchError : public Error {
public:
    using Error::Error;
};

/// A pair-process mark with zero compensator mass.
class ImpossibleMarkError : public Error {
public:
    using Error::Error;
};

/// A simulated path exceeded its jump-count cap.
class ExplosionError : public Error {
public:
    using Error::Error;
};

}  // namespace jumpctl
