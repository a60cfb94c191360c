#pragma once

#include <array>
#include <utility>
#include <vector>

#include "impnet/descriptor.hpp"
#include "impnet/types.hpp"

namespace impnet {

/// Coordinate basis of a two-axis ac port quantity.
///  - Dq: rotating orthogonal axes, real signals.
///  - Pn: complex symmetrical pair (positive / negative sequence small-signal
///    channels), related to Dq by the constant similarity sym_matrix().
enum class Domain { Dq, Pn };

/// Change of basis from Dq to Pn coordinates.
inline Mat2c sym_matrix() {
  Mat2c t;
  t << Complex(0.5, 0.0), Complex(0.0, 0.5), Complex(0.5, 0.0), Complex(0.0, -0.5);
  return t;
}

inline Mat2c sym_matrix_inverse() {
  Mat2c t;
  t << Complex(1.0, 0.0), Complex(1.0, 0.0), Complex(0.0, -1.0), Complex(0.0, 1.0);
  return t;
}

/// Rotation of Dq coordinates by theta: components measured in a frame that
/// leads the reference by theta.
inline Mat2d rot_dq(double theta) {
  Mat2d t;
  t << std::cos(theta), std::sin(theta), -std::sin(theta), std::cos(theta);
  return t;
}

/// The same rotation acting on Pn coordinates, where it is diagonal.
inline Mat2c rot_pn(double theta) {
  Mat2c t = Mat2c::Zero();
  t(0, 0) = std::exp(Complex(0.0, -theta));
  t(1, 1) = std::exp(Complex(0.0, theta));
  return t;
}

/// Domain conversions of a 2x2 ac block: similarity with sym_matrix().
ComplexDescriptor to_pn(const ComplexDescriptor& dq_block);
ComplexDescriptor to_dq(const ComplexDescriptor& pn_block);
inline ComplexDescriptor to_pn(const RealDescriptor& dq_block) {
  return to_pn(to_complex(dq_block));
}

/// Same conversions for a 3x3 block whose third port is a dc channel, which
/// the change of basis leaves untouched.
ComplexDescriptor to_pn_acdc(const ComplexDescriptor& dq_block);
ComplexDescriptor to_dq_acdc(const ComplexDescriptor& pn_block);
inline ComplexDescriptor to_pn_acdc(const RealDescriptor& dq_block) {
  return to_pn_acdc(to_complex(dq_block));
}

/// Re-expression of a block modelled in a local frame that leads the common
/// reference by theta: both port quantities are rotated, so the block maps
/// reference-frame inputs to reference-frame outputs.
RealDescriptor rereference(const RealDescriptor& local_block, double theta);
ComplexDescriptor rereference(const ComplexDescriptor& local_block, double theta);

/// Pn-domain version of the same operation (diagonal rotation).
ComplexDescriptor rereference_pn(const ComplexDescriptor& local_block, double theta);

/// Ac+dc block: the rotation acts on the ac pair only.
RealDescriptor rereference_acdc(const RealDescriptor& local_block, double theta);
ComplexDescriptor rereference_acdc(const ComplexDescriptor& local_block, double theta);

/// True when the block commutes with frame rotations: equal diagonal and
/// antisymmetric off-diagonal entries across probe frequencies. Such a block
/// is invariant under rereference().
bool is_dq_symmetric(const ComplexDescriptor& dq_block, double tol = 1e-9);
inline bool is_dq_symmetric(const RealDescriptor& dq_block, double tol = 1e-9) {
  return is_dq_symmetric(to_complex(dq_block), tol);
}

/// Eigenvalues of a 2x2 matrix in closed form.
std::pair<Complex, Complex> eigen_pair(const Mat2c& m);

/// Two continuous eigenvalue tracks of a sampled 2x2 response: consecutive
/// samples are paired by minimum total displacement so the tracks do not swap
/// identity at near-degenerate points.
std::array<std::vector<Complex>, 2> eigen_loci(const std::vector<Mat2c>& values);

}  // namespace impnet
