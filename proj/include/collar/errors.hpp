#pragma once

#include <stdexcept>
#include <string>

namespace collar {

/// Base class for all errors raised by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Input outside the documented domain (bad exponents, malformed config, ...).
struct DomainError : Error {
    using Error::Error;
};

/// A coefficient or state left the supported floating-point range.
struct NumericalError : Error {
    using Error::Error;
};

/// Eigensolver failed to converge after bounded restarts.
struct SolverError : Error {
    using Error::Error;
};

/// First-order perturbation requested on a clustered eigenvalue.
struct DegenerateError : Error {
    using Error::Error;
};

/// ODE solution exceeded the blow-up guard.
struct BlowupError : Error {
    using Error::Error;
};

} // namespace collar
