#pragma once

#include <stdexcept>
#include <string>

namespace patchslide {

/// Base class for every error this library reports.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The wrench is indeterminate for a zero twist (anywhere inside the limit
/// surface balances it).
struct ZeroTwistError : Error {
  ZeroTwistError() : Error("twist is zero; wrench indeterminate inside the limit surface") {}
};

/// A wrench handed to a surface-gradient query does not lie on the surface.
struct NotOnSurfaceError : Error {
  explicit NotOnSurfaceError(double h)
      : Error("wrench not on limit surface: H(w) = " + std::to_string(h)) {}
};

struct NotPositiveDefiniteError : Error {
  explicit NotPositiveDefiniteError(const std::string& what) : Error(what) {}
};

struct NonPositiveForceError : Error {
  explicit NonPositiveForceError(double f_n)
      : Error("normal force must be positive, got " + std::to_string(f_n)) {}
};

/// A generalized eigenvalue of the (A_hat, B) pencil sits on 1: the two limit
/// surfaces touch and the object twist is indeterminate for some hand twists.
struct DegenerateCError : Error {
  DegenerateCError() : Error("C = Lambda - I is rank deficient; mode indeterminate") {}
};

struct RankDeficientError : Error {
  RankDeficientError() : Error("ellipsoid fit normal system is singular") {}
};

struct NoRealRootError : Error {
  explicit NoRealRootError(const std::string& what) : Error(what) {}
};

/// Neither branch of the approximate solution admits k2 > 0.
struct NegativeK2Error : Error {
  NegativeK2Error() : Error("no gamma branch with k2 > 0; pivot guess inconsistent") {}
};

struct NotOnBoundaryError : Error {
  explicit NotOnBoundaryError(double alpha)
      : Error("twist is not on the sticking-pivoting boundary: alpha = " + std::to_string(alpha)) {}
};

struct InsufficientPointsError : Error {
  explicit InsufficientPointsError(const std::string& what) : Error(what) {}
};

struct NoLocusError : Error {
  NoLocusError() : Error("no motion-cone boundary roots inside the search box") {}
};

struct PreconditionError : Error {
  explicit PreconditionError(const std::string& what) : Error(what) {}
};

/// Scenario/trajectory file problems; message carries the offending key or line.
struct SchemaError : Error {
  explicit SchemaError(const std::string& what) : Error(what) {}
};

}  // namespace patchslide
