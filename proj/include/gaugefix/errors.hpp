#pragma once

#include <stdexcept>
#include <string>

namespace gaugefix {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NonFiniteValue : public Error {
 public:
  using Error::Error;
};

/// Raised when a Hessian's rank differs between sample points.
class RankNotConstant : public Error {
 public:
  using Error::Error;
};

/// The constraint commutation matrix cannot be inverted: some first class
/// constraint has no gauge-fixing partner.
class SingularCommutationMatrix : public Error {
 public:
  explicit SingularCommutationMatrix(const std::string& what)
      : Error("gauge not fully fixed: " + what) {}
};

class ChainNotTerminated : public Error {
 public:
  using Error::Error;
};

/// A consistency condition reduces to a non-vanishing function of the
/// existing constraints (the equations of motion are inconsistent).
class InconsistentDynamics : public Error {
 public:
  using Error::Error;
};

class SamplerFailure : public Error {
 public:
  using Error::Error;
};

class ReducibleConstraintSet : public Error {
 public:
  using Error::Error;
};

class AmbiguousClassification : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class SnapshotError : public Error {
 public:
  using Error::Error;
};

}  // namespace gaugefix
