#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace finsler {

/// Base class for all library errors.
class FinslerError : public std::runtime_error {
public:
    explicit FinslerError(const std::string& what) : std::runtime_error(what) {}
};

/// A scalar-field evaluation produced a non-finite value or was called
/// outside its domain (e.g. y = 0 on the slit bundle).
class EvaluationError : public FinslerError {
public:
    using FinslerError::FinslerError;
};

/// The fundamental tensor failed to be positive definite at a point.
class StrongConvexityViolation : public FinslerError {
public:
    StrongConvexityViolation(const std::string& what, double min_eigenvalue,
                             std::vector<double> x, std::vector<double> y)
        : FinslerError(what), min_eigenvalue(min_eigenvalue),
          x(std::move(x)), y(std::move(y)) {}

    double min_eigenvalue;
    std::vector<double> x;
    std::vector<double> y;
};

/// A y-local model was used in a fiber-global computation without a cone.
class ConeRequired : public FinslerError {
public:
    using FinslerError::FinslerError;
};

/// Flag curvature requested for a flag whose denominator underflows
/// (transverse edge parallel to the flag pole).
class DegenerateFlag : public FinslerError {
public:
    using FinslerError::FinslerError;
};

/// Adaptive integration could not make progress; carries the last good state.
class IntegrationStalled : public FinslerError {
public:
    IntegrationStalled(const std::string& what, double t, std::vector<double> state)
        : FinslerError(what), t(t), state(std::move(state)) {}

    double t;
    std::vector<double> state;
};

/// Parallel transport under a y-dependent field needs a reference vector.
class MissingReference : public FinslerError {
public:
    using FinslerError::FinslerError;
};

/// Model file / expression parse failure, with position information.
class ParseError : public FinslerError {
public:
    ParseError(const std::string& what, std::size_t position)
        : FinslerError(what), position(position) {}

    std::size_t position;
};

/// Operation not available for this model (e.g. x-derivatives of an
/// interpolated model backed by a numeric matrix field).
class UnsupportedOperation : public FinslerError {
public:
    using FinslerError::FinslerError;
};

} // namespace finsler
