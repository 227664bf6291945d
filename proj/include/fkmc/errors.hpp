#pragma once

#include <stdexcept>
#include <string>

namespace fkmc {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A user-supplied coefficient or payoff function failed to evaluate.
struct EvaluationError : Error {
    using Error::Error;
};

/// The diffusion remainder 2b - sum beta beta^T has a genuinely negative
/// eigenvalue (beyond tolerance) at some probe point.
struct NotPSD : Error {
    using Error::Error;
};

/// A simulated state escaped the configured bound; almost always a
/// mis-specified coefficient set.
struct NumericalBlowup : Error {
    using Error::Error;
};

/// Terminal data does not vanish on the domain boundary.
struct InvalidTerminal : Error {
    using Error::Error;
};

struct InterpolationOutOfRange : Error {
    using Error::Error;
};

struct GridMismatch : Error {
    using Error::Error;
};

struct NotElliptic : Error {
    using Error::Error;
};

struct Instability : Error {
    using Error::Error;
};

struct SupportOutsideGrid : Error {
    using Error::Error;
};

struct InvalidKernel : Error {
    using Error::Error;
};

struct RateSignViolation : Error {
    using Error::Error;
};

struct NoConvergence : Error {
    using Error::Error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct ZetaBoundaryViolation : Error {
    using Error::Error;
};

struct KernelBudgetExceeded : Error {
    using Error::Error;
};

struct FieldOutOfRange : Error {
    using Error::Error;
};

/// Configuration / CLI input problems (bad keys, missing sections, ...).
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace fkmc
