#pragma once

#include <stdexcept>
#include <string>

namespace liapcert {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid parameters, malformed configuration, violated preconditions.
/// CLI exit code 1.
struct InvalidInputError : Error {
    using Error::Error;
};

/// A certificate could not be established: failed positivity, violated
/// admissibility condition, coupling beyond a numerically determined
/// threshold. CLI exit code 2.
struct CertificationError : Error {
    using Error::Error;
};

/// No (p, eps) in the searched range yields a valid certificate.
struct NoCertificateError : CertificationError {
    using CertificationError::CertificationError;
};

/// The admissible p interval from the weak-coupling condition is empty or
/// the requested p lies outside it.
struct InvalidPError : CertificationError {
    using CertificationError::CertificationError;
};

/// Coupling strength beyond the admissible range for this system.
struct CouplingTooStrongError : CertificationError {
    double threshold = 0.0;
    CouplingTooStrongError(const std::string& msg, double thr)
        : CertificationError(msg), threshold(thr) {}
};

/// Numerical failure: eigensolver non-convergence, singular solve,
/// integrator instability. CLI exit code 3.
struct NumericalError : Error {
    using Error::Error;
};

/// Requested integrator step is unstable; carries a stable suggestion.
struct StepSizeError : NumericalError {
    double suggested_dt = 0.0;
    StepSizeError(const std::string& msg, double dt)
        : NumericalError(msg), suggested_dt(dt) {}
};

} // namespace liapcert
