#pragma once

#include <stdexcept>
#include <string>

namespace dnspde {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (non-finite input, bad parameter, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Two objects that must share a shape (grid, dimension, mode count) do not.
class ShapeMismatch : public Error {
public:
    using Error::Error;
};

/// An iterative method failed to reach its tolerance or lost its bracket.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// A configuration is syntactically valid but unsupported by the requested routine.
class Unsupported : public Error {
public:
    using Error::Error;
};

/// A time-stepping run failed; `step` is the index of the step being taken
/// (0 when the run was refused before the first step).
class SolverFailure : public Error {
public:
    SolverFailure(int step, const std::string& message)
        : Error("step " + std::to_string(step) + ": " + message), step_(step), detail_(message)
    {
    }
    [[nodiscard]] int step() const noexcept { return step_; }
    [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

private:
    int step_;
    std::string detail_;
};

} // namespace dnspde
