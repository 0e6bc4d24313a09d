#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace slit {

/// Input outside the domain where an operation is defined (bad parameter,
/// query point outside a sampled curve, unresolvable radius, ...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A computed artifact failed a self-check (non-finite field, structure
/// violation in a linear system, malformed input file).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An iterative solver hit its iteration cap. Carries the residual history so
/// callers can tell stagnation from slow convergence.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, std::vector<double> history)
        : std::runtime_error(what), history_(std::move(history)) {}
    const std::vector<double>& history() const noexcept { return history_; }

private:
    std::vector<double> history_;
};

}  // namespace slit
