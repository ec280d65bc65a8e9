#pragma once

#include <stdexcept>
#include <string>

namespace sgsde {

// Raised when a skew-gradient denominator a(x)^T grad I(x) underflows the
// relative threshold; regularizing silently would break invariant preservation.
class SingularDenominatorError : public std::runtime_error {
public:
    explicit SingularDenominatorError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when the implicit fixed-point solve fails to reach tolerance.
class NonConvergenceError : public std::runtime_error {
public:
    NonConvergenceError(const std::string& what, double residual, int iterations)
        : std::runtime_error(what), last_residual(residual), iterations_used(iterations) {}

    double last_residual = 0.0;
    int iterations_used = 0;
};

// Raised when a trajectory leaves the domain a problem is defined on
// (e.g. a Lotka-Volterra coordinate crossing below the positivity floor).
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a Monte Carlo study exceeds its path-failure budget.
class StudyFailureError : public std::runtime_error {
public:
    explicit StudyFailureError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sgsde
