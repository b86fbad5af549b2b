#pragma once
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fibertwist {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A field value became inf/NaN during a solve (blow-up or instability).
class NonFiniteFieldError : public Error {
public:
    using Error::Error;
};

// Coefficient samples do not line up with the grid they are used on.
class DimensionMismatchError : public Error {
public:
    using Error::Error;
};

// Data segment does not cover the characteristic domain of a solve.
class GeometryError : public Error {
public:
    using Error::Error;
};

// An iteration hit its step limit; carries the residual history.
class NoConvergenceError : public Error {
public:
    NoConvergenceError(const std::string& what, std::vector<double> history)
        : Error(what), history(std::move(history)) {}
    std::vector<double> history;
    double last_residual() const {
        return history.empty() ? 0.0 : history.back();
    }
};

// E_inf is undefined: the reference profile vanishes at every node.
class EmptySupportError : public Error {
public:
    using Error::Error;
};

// Trace difference is zero while the coefficients differ; would contradict
// injectivity of the forward map.
class DegenerateDenominatorError : public Error {
public:
    using Error::Error;
};

// An energy-inequality check was handed a field that does not satisfy the
// hypotheses of the inequality.
class HypothesisViolatedError : public Error {
public:
    using Error::Error;
};

// Malformed expression text; offset is the byte position of the problem.
class SyntaxError : public Error {
public:
    SyntaxError(const std::string& what, std::size_t offset)
        : Error(what + " (at offset " + std::to_string(offset) + ")"),
          offset(offset) {}
    std::size_t offset;
};

class UnknownFunctionError : public Error {
public:
    using Error::Error;
};

class UnknownVariableError : public Error {
public:
    using Error::Error;
};

// Evaluation left the function's domain (log of non-positive value, etc.).
class DomainError : public Error {
public:
    using Error::Error;
};

// Bad configuration or input file on the CLI surface.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace fibertwist
