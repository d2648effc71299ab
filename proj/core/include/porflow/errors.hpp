#pragma once

#include <stdexcept>
#include <string>

namespace porflow {

/// Argument outside the domain of a constitutive function (e.g. S not in (0,1)).
class DomainError : public std::domain_error
{
public:
    using std::domain_error::domain_error;
};

/// A scalar iteration (inversion, quadrature) failed to reach its tolerance.
class ConvergenceError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Material parameters violate the energy admissibility condition.
class AdmissibilityError : public std::invalid_argument
{
public:
    AdmissibilityError(const std::string& what, double margin)
        : std::invalid_argument(what), margin_(margin)
    {}

    double margin() const { return margin_; }

private:
    double margin_;
};

/// Rejected input: mesh description, problem data, run configuration.
class ValidationError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// A monitored invariant (saturation bounds, nodal consistency) was broken.
class InvariantViolation : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

} // namespace porflow
