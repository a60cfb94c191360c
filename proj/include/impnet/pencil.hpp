#pragma once

#include <vector>

#include "impnet/descriptor.hpp"
#include "impnet/types.hpp"

namespace impnet {

/// Eigenvalues of the matrix pencil (M, N): the roots of det(M - lambda N).
struct PencilEigenvalues {
  /// Finite eigenvalues, sorted by (real, imag).
  std::vector<Complex> finite;
  /// Count of infinite eigenvalues (generalized eigenvalues with beta = 0).
  Index infinite = 0;
};

/// Full eigenvalue set of a regular pencil det(M - lambda N) = 0.
///
/// Solved through a shift-inverted companion K = (M - sigma N)^{-1} N whose
/// eigenvalues kappa map back as lambda = sigma + 1/kappa; kappa near zero
/// corresponds to infinite lambda. The shift radius is chosen in a first wide
/// pass and then tightened so that rounding noise from the nilpotent (infinite)
/// structure stays orders of magnitude below the finite/infinite decision
/// threshold. Throws IrregularPencil when no trial shift yields an invertible
/// M - sigma N.
PencilEigenvalues pencil_eigenvalues(const MatXc& m, const MatXc& n);

/// Generalized eigenvalues of (A, E): roots of det(A - lambda E), multiplicity
/// included. For a descriptor realization these are the dynamic modes,
/// whether or not they are reachable and observable from the ports.
std::vector<Complex> poles(const ComplexDescriptor& g);
inline std::vector<Complex> poles(const RealDescriptor& g) { return poles(to_complex(g)); }

/// Invariant zeros: finite eigenvalues of the bordered pencil
/// [[A, B], [C, D]] - lambda [[E, 0], [0, 0]] for a square block.
std::vector<Complex> invariant_zeros(const ComplexDescriptor& g);
inline std::vector<Complex> invariant_zeros(const RealDescriptor& g) {
  return invariant_zeros(to_complex(g));
}

/// Zeros of det(G(s)) as a rational function. Equal to the invariant zeros
/// with every mode of (A, E) that reappears in the bordered pencil cancelled
/// out: det(bordered pencil)(s) = det(A - s E) det(G(s)), so modes that are
/// hidden from the ports or cancel inside the determinant show up in both
/// spectra and must be subtracted as a matched multiset. Without this
/// subtraction a non-minimal composition would report its internal modes as
/// zeros.
std::vector<Complex> transmission_zeros(const ComplexDescriptor& g);
inline std::vector<Complex> transmission_zeros(const RealDescriptor& g) {
  return transmission_zeros(to_complex(g));
}

}  // namespace impnet
