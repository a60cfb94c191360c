#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace impnet {

/// Root type for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Operands have incompatible shapes for the requested operation.
struct DimensionMismatch : Error {
  using Error::Error;
};

/// A square system was required (inversion, zeros, port elimination).
struct NonSquareSystem : Error {
  using Error::Error;
};

/// det(M - s N) vanishes identically; the pencil has no eigenvalue problem.
struct IrregularPencil : Error {
  using Error::Error;
};

/// (s E - A) is numerically singular at the requested frequency.
struct SingularAtFrequency : Error {
  using Error::Error;
};

/// A block was supplied in the wrong coordinate domain (dq vs sequence pair).
struct WrongDomain : Error {
  using Error::Error;
};

/// Impedance passed where admittance was required, or vice versa.
struct WrongKind : Error {
  using Error::Error;
};

/// Blocks referenced to different frames were combined without rereferencing.
struct FrameMismatch : Error {
  using Error::Error;
};

/// Consecutive contour samples move by more than the trusted phase step.
struct ContourTooCoarse : Error {
  ContourTooCoarse(const std::string& msg, std::size_t segment_index)
      : Error(msg), index(segment_index) {}
  std::size_t index;  ///< sample index where the step was too large
};

/// A locus sample fell within the exclusion radius of the critical point.
struct PointOnLocus : Error {
  using Error::Error;
};

/// Operating point values are inconsistent or out of the modeled range.
struct InvalidOperatingPoint : Error {
  using Error::Error;
};

/// An iterative solve (power flow, shift selection) failed to converge.
struct NoConvergence : Error {
  using Error::Error;
};

/// Network description failed validation.
struct InvalidNetwork : Error {
  using Error::Error;
};

/// Configuration file could not be parsed or violates the schema.
struct ConfigError : Error {
  using Error::Error;
};

/// Time-domain integration grew beyond the divergence guard.
struct IntegratorDivergence : Error {
  IntegratorDivergence(const std::string& msg, double rate)
      : Error(msg), growth_rate(rate) {}
  double growth_rate;  ///< estimated exponential growth rate (1/s)
};

}  // namespace impnet
