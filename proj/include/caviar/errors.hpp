#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace caviar {

/// Bad caller input: domain violations, malformed files, unsupported forms.
/// The CLI maps these to exit code 2.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Numerical failure of an otherwise well-formed computation (exit code 3).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SingularMatrixError : public NumericalError {
public:
    explicit SingularMatrixError(const std::string& what, std::size_t iteration = 0)
        : NumericalError(what), iteration_(iteration) {}

    /// Sandwich iteration at which the singular matrix appeared (0 when not iterating).
    [[nodiscard]] std::size_t iteration() const noexcept { return iteration_; }

private:
    std::size_t iteration_;
};

enum class PathErrorKind { NonFinite, NegativeRadicand, DivisionByZero };

/// Raised by the quantile recursion; `time` is the 1-based index of the failing step.
class PathError : public NumericalError {
public:
    PathError(PathErrorKind kind, std::size_t time, const std::string& what)
        : NumericalError(what), kind_(kind), time_(time) {}

    [[nodiscard]] PathErrorKind kind() const noexcept { return kind_; }
    [[nodiscard]] std::size_t time() const noexcept { return time_; }

private:
    PathErrorKind kind_;
    std::size_t time_;
};

class ExplosionError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class AllTrialsInvalidError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class BandwidthDomainError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DegenerateGradientError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class UnsupportedError : public InputError {
public:
    using InputError::InputError;
};

}  // namespace caviar
