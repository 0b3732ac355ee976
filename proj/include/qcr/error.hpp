#pragma once

#include <stdexcept>
#include <string>

namespace qcr {

/// An input outside the mathematical or physical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A numerical procedure failed to reach its requested accuracy.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, double error_estimate = 0.0)
        : std::runtime_error(what), error_estimate_(error_estimate) {}

    double error_estimate() const noexcept { return error_estimate_; }

private:
    double error_estimate_;
};

/// Explicit time stepping was asked to take a step it cannot take stably.
class StiffnessError : public NumericError {
public:
    StiffnessError(const std::string& what, double stiffness)
        : NumericError(what, stiffness) {}
};

}  // namespace qcr
