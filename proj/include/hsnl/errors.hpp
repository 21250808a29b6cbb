#pragma once

#include <stdexcept>
#include <string>

namespace hsnl {

// Argument outside the mathematical domain of an operation (r <= 0, mu_1 <= 0, d unsupported...).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Kernel or problem data violate a standing assumption (divergent moments, alpha > beta, ...).
struct AssumptionViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad user configuration: unknown keys, malformed values.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A numerical routine failed to reach its tolerance (quadrature, factorization).
struct NumericalFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Iterative solver hit its iteration cap.
struct NonConvergence : std::runtime_error {
    NonConvergence(const std::string& what, double residual)
        : std::runtime_error(what), last_residual(residual) {}
    double last_residual;
};

}  // namespace hsnl
