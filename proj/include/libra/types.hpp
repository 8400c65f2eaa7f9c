#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace libra {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Ill-conditioned or singular linear algebra.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

/// Fiber Hessian d2H/dp2 failed to be positive definite.
class ConvexityError : public Error {
 public:
  using Error::Error;
};

/// Oracle returned a non-finite value.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// Step size collapsed during integration; carries the last time reached.
class BlowUpError : public Error {
 public:
  BlowUpError(const std::string& what, double last_time)
      : Error(what), last_time_(last_time) {}
  double last_time() const { return last_time_; }

 private:
  double last_time_;
};

class AccuracyError : public Error {
 public:
  using Error::Error;
};

class NewtonError : public Error {
 public:
  using Error::Error;
};

/// No fiber minimum at the requested configuration point.
class NoMinimumError : public NewtonError {
 public:
  using NewtonError::NewtonError;
};

class SymmetryError : public NewtonError {
 public:
  using NewtonError::NewtonError;
};

/// Periodic-orbit Newton converged toward an equilibrium.
class PeriodCollapseError : public NewtonError {
 public:
  using NewtonError::NewtonError;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Section frame cannot be built (graph condition dp0 H = 0).
class SectionError : public Error {
 public:
  using Error::Error;
};

/// q0 is not monotone along the requested segment.
class ReparametrizationError : public Error {
 public:
  using Error::Error;
};

class NotTwoWayError : public Error {
 public:
  using Error::Error;
};

class ClassificationError : public Error {
 public:
  using Error::Error;
};

class DecompositionError : public Error {
 public:
  using Error::Error;
};

class InvertibilityError : public Error {
 public:
  using Error::Error;
};

/// Derivative provider cannot supply the requested order.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

class ConstructionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace libra
