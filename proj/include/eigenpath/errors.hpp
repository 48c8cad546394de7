#pragma once

#include <stdexcept>
#include <string>

namespace eigenpath {

// Base class for all failures raised by the library. The CLI maps
// ValidationError to exit code 2 and NumericalError to exit code 3.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ValidationError : Error {
  using Error::Error;
};

struct NumericalError : Error {
  using Error::Error;
};

struct NonNormalError : NumericalError {
  using NumericalError::NumericalError;
};

struct NoConvergenceError : NumericalError {
  using NumericalError::NumericalError;
};

struct SingularOperatorError : NumericalError {
  using NumericalError::NumericalError;
};

struct BoundaryEigenvalueError : NumericalError {
  using NumericalError::NumericalError;
};

struct EmptyWindowError : NumericalError {
  using NumericalError::NumericalError;
};

struct ResolventBlowupError : NumericalError {
  using NumericalError::NumericalError;
};

struct NonPhysicalStateError : NumericalError {
  using NumericalError::NumericalError;
};

struct EnvelopeViolationError : NumericalError {
  using NumericalError::NumericalError;
};

struct GapModelMissingError : ValidationError {
  using ValidationError::ValidationError;
};

struct KappaTooSmallError : ValidationError {
  using ValidationError::ValidationError;
};

struct SingularMatrixError : ValidationError {
  using ValidationError::ValidationError;
};

struct NormTooLargeError : ValidationError {
  using ValidationError::ValidationError;
};

struct StepTooLargeError : ValidationError {
  using ValidationError::ValidationError;
};

struct AssumptionNotCertifiedError : ValidationError {
  using ValidationError::ValidationError;
};

struct DimensionMismatchError : ValidationError {
  using ValidationError::ValidationError;
};

struct InvalidMarkedSetError : ValidationError {
  using ValidationError::ValidationError;
};

struct NonPositiveGapError : ValidationError {
  using ValidationError::ValidationError;
};

struct ScheduleNotDifferentiableError : ValidationError {
  using ValidationError::ValidationError;
};

struct StepUnderflowError : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace eigenpath
