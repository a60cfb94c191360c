#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "impnet/errors.hpp"
#include "impnet/types.hpp"

namespace impnet {

/// Linear time-invariant block in descriptor form:
///
///   E dx/dt = A x + B u
///        y  = C x + D u
///
/// E may be singular; rows with a zero row in E are algebraic constraints.
/// All composition operations below are exact state-space algebra: no
/// polynomial arithmetic and no fitting, so compositions introduce no
/// approximation beyond floating point.
template <typename Scalar>
struct DescriptorSystem {
  MatX<Scalar> E, A, B, C, D;

  DescriptorSystem() : E(0, 0), A(0, 0), B(0, 0), C(0, 0), D(0, 0) {}

  DescriptorSystem(MatX<Scalar> E_, MatX<Scalar> A_, MatX<Scalar> B_,
                   MatX<Scalar> C_, MatX<Scalar> D_)
      : E(std::move(E_)), A(std::move(A_)), B(std::move(B_)),
        C(std::move(C_)), D(std::move(D_)) {
    const Index n = A.rows();
    if (A.cols() != n || E.rows() != n || E.cols() != n)
      throw DimensionMismatch("descriptor: E and A must be square and equal-sized");
    if (B.rows() != n)
      throw DimensionMismatch("descriptor: B row count must match state count");
    if (C.cols() != n)
      throw DimensionMismatch("descriptor: C column count must match state count");
    if (D.rows() != C.rows() || D.cols() != B.cols())
      throw DimensionMismatch("descriptor: D must be outputs x inputs");
  }

  Index states() const { return A.rows(); }
  Index inputs() const { return B.cols(); }
  Index outputs() const { return C.rows(); }

  bool square() const { return inputs() == outputs(); }

  /// Static block y = D u with no dynamics.
  static DescriptorSystem gain(const MatX<Scalar>& d) {
    return DescriptorSystem(MatX<Scalar>(0, 0), MatX<Scalar>(0, 0),
                            MatX<Scalar>(0, d.cols()), MatX<Scalar>(d.rows(), 0), d);
  }

  static DescriptorSystem identity(Index m) {
    return gain(MatX<Scalar>::Identity(m, m));
  }
};

using RealDescriptor = DescriptorSystem<double>;
using ComplexDescriptor = DescriptorSystem<Complex>;

template <typename Scalar>
ComplexDescriptor to_complex(const DescriptorSystem<Scalar>& g) {
  return ComplexDescriptor(g.E.template cast<Complex>(), g.A.template cast<Complex>(),
                           g.B.template cast<Complex>(), g.C.template cast<Complex>(),
                           g.D.template cast<Complex>());
}

inline const ComplexDescriptor& to_complex(const ComplexDescriptor& g) { return g; }

namespace detail {

/// Two-sided row/column equilibration by powers of two. Scaling is exact in
/// binary floating point, and without it the rcond gates below misread a
/// regular but badly scaled matrix (rows carrying a large |s| shift grow while
/// algebraic rows do not) as singular.
inline void equilibrate(const MatXc& m, VecXd& r, VecXd& c) {
  const Index n = m.rows();
  r = VecXd::Ones(n);
  c = VecXd::Ones(n);
  for (int sweep = 0; sweep < 3; ++sweep) {
    for (Index i = 0; i < n; ++i) {
      double mx = 0.0;
      for (Index j = 0; j < n; ++j) mx = std::max(mx, r(i) * std::abs(m(i, j)) * c(j));
      if (mx > 0.0) r(i) *= std::exp2(-std::round(std::log2(mx)));
    }
    for (Index j = 0; j < n; ++j) {
      double mx = 0.0;
      for (Index i = 0; i < n; ++i) mx = std::max(mx, r(i) * std::abs(m(i, j)) * c(j));
      if (mx > 0.0) c(j) *= std::exp2(-std::round(std::log2(mx)));
    }
  }
}

}  // namespace detail

/// Transfer matrix value C (s E - A)^{-1} B + D.
template <typename Scalar>
MatXc evaluate(const DescriptorSystem<Scalar>& g, Complex s) {
  const MatXc d = g.D.template cast<Complex>();
  if (g.states() == 0) return d;
  const MatXc p = s * g.E.template cast<Complex>() - g.A.template cast<Complex>();
  VecXd r, c;
  detail::equilibrate(p, r, c);
  Eigen::PartialPivLU<MatXc> lu(r.asDiagonal() * p * c.asDiagonal());
  if (!(lu.rcond() > 1e-13))
    throw SingularAtFrequency("evaluate: (sE - A) is singular at s = (" +
                              std::to_string(s.real()) + ", " + std::to_string(s.imag()) + ")");
  // (s E - A)^{-1} = C_scale (R p C_scale)^{-1} R, applied to B.
  const MatXc x = c.asDiagonal() *
                  lu.solve(r.asDiagonal() * g.B.template cast<Complex>());
  return g.C.template cast<Complex>() * x + d;
}

/// Sum of transfer matrices (series impedance / parallel admittance).
template <typename Scalar>
DescriptorSystem<Scalar> add(const DescriptorSystem<Scalar>& g1,
                             const DescriptorSystem<Scalar>& g2) {
  if (g1.inputs() != g2.inputs() || g1.outputs() != g2.outputs())
    throw DimensionMismatch("add: operands must share input and output dimensions");
  const Index n1 = g1.states(), n2 = g2.states();
  const Index m = g1.inputs(), p = g1.outputs();
  MatX<Scalar> E = MatX<Scalar>::Zero(n1 + n2, n1 + n2);
  MatX<Scalar> A = MatX<Scalar>::Zero(n1 + n2, n1 + n2);
  MatX<Scalar> B(n1 + n2, m), C(p, n1 + n2);
  E.topLeftCorner(n1, n1) = g1.E;
  E.bottomRightCorner(n2, n2) = g2.E;
  A.topLeftCorner(n1, n1) = g1.A;
  A.bottomRightCorner(n2, n2) = g2.A;
  B.topRows(n1) = g1.B;
  B.bottomRows(n2) = g2.B;
  C.leftCols(n1) = g1.C;
  C.rightCols(n2) = g2.C;
  return DescriptorSystem<Scalar>(E, A, B, C, g1.D + g2.D);
}

/// Cascade g1 * g2: u -> g2 -> g1 -> y.
template <typename Scalar>
DescriptorSystem<Scalar> multiply(const DescriptorSystem<Scalar>& g1,
                                  const DescriptorSystem<Scalar>& g2) {
  if (g1.inputs() != g2.outputs())
    throw DimensionMismatch("multiply: inner dimensions do not match");
  const Index n1 = g1.states(), n2 = g2.states();
  MatX<Scalar> E = MatX<Scalar>::Zero(n1 + n2, n1 + n2);
  MatX<Scalar> A = MatX<Scalar>::Zero(n1 + n2, n1 + n2);
  MatX<Scalar> B(n1 + n2, g2.inputs());
  MatX<Scalar> C(g1.outputs(), n1 + n2);
  E.topLeftCorner(n1, n1) = g1.E;
  E.bottomRightCorner(n2, n2) = g2.E;
  A.topLeftCorner(n1, n1) = g1.A;
  A.topRightCorner(n1, n2) = g1.B * g2.C;
  A.bottomRightCorner(n2, n2) = g2.A;
  B.topRows(n1) = g1.B * g2.D;
  B.bottomRows(n2) = g2.B;
  C.leftCols(n1) = g1.C;
  C.rightCols(n2) = g1.D * g2.C;
  return DescriptorSystem<Scalar>(E, A, B, C, g1.D * g2.D);
}

/// Exact inverse of a square block. The input u is appended as an algebraic
/// variable, so D need not be invertible; the result is regular exactly when
/// the transfer matrix is invertible as a rational matrix.
template <typename Scalar>
DescriptorSystem<Scalar> invert(const DescriptorSystem<Scalar>& g) {
  if (!g.square()) throw NonSquareSystem("invert: block must be square");
  const Index n = g.states(), m = g.inputs();
  MatX<Scalar> E = MatX<Scalar>::Zero(n + m, n + m);
  MatX<Scalar> A(n + m, n + m), B(n + m, m), C(m, n + m);
  E.topLeftCorner(n, n) = g.E;
  A.topLeftCorner(n, n) = g.A;
  A.topRightCorner(n, m) = g.B;
  A.bottomLeftCorner(m, n) = g.C;
  A.bottomRightCorner(m, m) = g.D;
  B.setZero();
  B.bottomRows(m) = -MatX<Scalar>::Identity(m, m);
  C.setZero();
  C.rightCols(m) = MatX<Scalar>::Identity(m, m);
  return DescriptorSystem<Scalar>(E, A, B, C, MatX<Scalar>::Zero(m, m));
}

/// Parallel interconnection of impedances: (g1^{-1} + g2^{-1})^{-1}.
template <typename Scalar>
DescriptorSystem<Scalar> parallel(const DescriptorSystem<Scalar>& g1,
                                  const DescriptorSystem<Scalar>& g2) {
  return invert(add(invert(g1), invert(g2)));
}

/// Negative-feedback closed loop (I + g h)^{-1} g.
template <typename Scalar>
DescriptorSystem<Scalar> feedback(const DescriptorSystem<Scalar>& g,
                                  const DescriptorSystem<Scalar>& h) {
  DescriptorSystem<Scalar> loop = multiply(g, h);
  if (!loop.square()) throw NonSquareSystem("feedback: g h must be square");
  return multiply(invert(add(DescriptorSystem<Scalar>::identity(loop.inputs()), loop)), g);
}

/// Output scaling k * g.
template <typename Scalar, typename Factor>
DescriptorSystem<Scalar> scale(const DescriptorSystem<Scalar>& g, Factor k) {
  DescriptorSystem<Scalar> r = g;
  r.C *= k;
  r.D *= k;
  return r;
}

/// Port-diagonal concatenation: inputs and outputs of g2 appended after g1.
template <typename Scalar>
DescriptorSystem<Scalar> block_diag(const DescriptorSystem<Scalar>& g1,
                                    const DescriptorSystem<Scalar>& g2) {
  const Index n1 = g1.states(), n2 = g2.states();
  MatX<Scalar> E = MatX<Scalar>::Zero(n1 + n2, n1 + n2);
  MatX<Scalar> A = MatX<Scalar>::Zero(n1 + n2, n1 + n2);
  MatX<Scalar> B = MatX<Scalar>::Zero(n1 + n2, g1.inputs() + g2.inputs());
  MatX<Scalar> C = MatX<Scalar>::Zero(g1.outputs() + g2.outputs(), n1 + n2);
  MatX<Scalar> D = MatX<Scalar>::Zero(g1.outputs() + g2.outputs(), g1.inputs() + g2.inputs());
  E.topLeftCorner(n1, n1) = g1.E;
  E.bottomRightCorner(n2, n2) = g2.E;
  A.topLeftCorner(n1, n1) = g1.A;
  A.bottomRightCorner(n2, n2) = g2.A;
  B.topLeftCorner(n1, g1.inputs()) = g1.B;
  B.bottomRightCorner(n2, g2.inputs()) = g2.B;
  C.topLeftCorner(g1.outputs(), n1) = g1.C;
  C.bottomRightCorner(g2.outputs(), n2) = g2.C;
  D.topLeftCorner(g1.outputs(), g1.inputs()) = g1.D;
  D.bottomRightCorner(g2.outputs(), g2.inputs()) = g2.D;
  return DescriptorSystem<Scalar>(E, A, B, C, D);
}

/// Row/column selection of ports, sharing the state vector.
template <typename Scalar>
DescriptorSystem<Scalar> subsystem(const DescriptorSystem<Scalar>& g,
                                   const std::vector<Index>& out_idx,
                                   const std::vector<Index>& in_idx) {
  MatX<Scalar> B(g.states(), static_cast<Index>(in_idx.size()));
  MatX<Scalar> C(static_cast<Index>(out_idx.size()), g.states());
  MatX<Scalar> D(static_cast<Index>(out_idx.size()), static_cast<Index>(in_idx.size()));
  for (std::size_t j = 0; j < in_idx.size(); ++j) {
    if (in_idx[j] < 0 || in_idx[j] >= g.inputs())
      throw DimensionMismatch("subsystem: input index out of range");
    B.col(static_cast<Index>(j)) = g.B.col(in_idx[j]);
  }
  for (std::size_t i = 0; i < out_idx.size(); ++i) {
    if (out_idx[i] < 0 || out_idx[i] >= g.outputs())
      throw DimensionMismatch("subsystem: output index out of range");
    C.row(static_cast<Index>(i)) = g.C.row(out_idx[i]);
    for (std::size_t j = 0; j < in_idx.size(); ++j)
      D(static_cast<Index>(i), static_cast<Index>(j)) = g.D(out_idx[i], in_idx[j]);
  }
  return DescriptorSystem<Scalar>(g.E, g.A, B, C, D);
}

/// Static output transformation y' = M y.
template <typename Scalar>
DescriptorSystem<Scalar> transform_outputs(const DescriptorSystem<Scalar>& g,
                                           const MatX<Scalar>& m) {
  if (m.cols() != g.outputs())
    throw DimensionMismatch("transform_outputs: matrix columns must match outputs");
  DescriptorSystem<Scalar> r = g;
  r.C = m * g.C;
  r.D = m * g.D;
  return r;
}

/// Static input transformation u = M u'.
template <typename Scalar>
DescriptorSystem<Scalar> transform_inputs(const DescriptorSystem<Scalar>& g,
                                          const MatX<Scalar>& m) {
  if (m.rows() != g.inputs())
    throw DimensionMismatch("transform_inputs: matrix rows must match inputs");
  DescriptorSystem<Scalar> r = g;
  r.B = g.B * m;
  r.D = g.D * m;
  return r;
}

/// Port elimination on a square multi-port block y = G u: the rows in `elim`
/// are constrained to zero output and the matching inputs are solved for as
/// algebraic variables. Returns the map from the kept inputs to the kept
/// outputs. For a nodal admittance block this is Kron reduction of the
/// eliminated nodes, performed exactly in descriptor form.
template <typename Scalar>
DescriptorSystem<Scalar> eliminate_ports(const DescriptorSystem<Scalar>& g,
                                         const std::vector<Index>& elim) {
  if (!g.square()) throw NonSquareSystem("eliminate_ports: block must be square");
  std::vector<bool> is_elim(static_cast<std::size_t>(g.inputs()), false);
  for (Index i : elim) {
    if (i < 0 || i >= g.inputs())
      throw DimensionMismatch("eliminate_ports: port index out of range");
    is_elim[static_cast<std::size_t>(i)] = true;
  }
  std::vector<Index> keep;
  for (Index i = 0; i < g.inputs(); ++i)
    if (!is_elim[static_cast<std::size_t>(i)]) keep.push_back(i);

  const Index n = g.states();
  const Index ne = static_cast<Index>(elim.size());
  const Index nk = static_cast<Index>(keep.size());
  MatX<Scalar> Be(n, ne), Bk(n, nk), Ce(ne, n), Ck(nk, n);
  MatX<Scalar> Dee(ne, ne), Dek(ne, nk), Dke(nk, ne), Dkk(nk, nk);
  for (Index j = 0; j < ne; ++j) Be.col(j) = g.B.col(elim[static_cast<std::size_t>(j)]);
  for (Index j = 0; j < nk; ++j) Bk.col(j) = g.B.col(keep[static_cast<std::size_t>(j)]);
  for (Index i = 0; i < ne; ++i) Ce.row(i) = g.C.row(elim[static_cast<std::size_t>(i)]);
  for (Index i = 0; i < nk; ++i) Ck.row(i) = g.C.row(keep[static_cast<std::size_t>(i)]);
  for (Index i = 0; i < ne; ++i)
    for (Index j = 0; j < ne; ++j)
      Dee(i, j) = g.D(elim[static_cast<std::size_t>(i)], elim[static_cast<std::size_t>(j)]);
  for (Index i = 0; i < ne; ++i)
    for (Index j = 0; j < nk; ++j)
      Dek(i, j) = g.D(elim[static_cast<std::size_t>(i)], keep[static_cast<std::size_t>(j)]);
  for (Index i = 0; i < nk; ++i)
    for (Index j = 0; j < ne; ++j)
      Dke(i, j) = g.D(keep[static_cast<std::size_t>(i)], elim[static_cast<std::size_t>(j)]);
  for (Index i = 0; i < nk; ++i)
    for (Index j = 0; j < nk; ++j)
      Dkk(i, j) = g.D(keep[static_cast<std::size_t>(i)], keep[static_cast<std::size_t>(j)]);

  MatX<Scalar> E = MatX<Scalar>::Zero(n + ne, n + ne);
  MatX<Scalar> A(n + ne, n + ne), B(n + ne, nk), C(nk, n + ne);
  E.topLeftCorner(n, n) = g.E;
  A.topLeftCorner(n, n) = g.A;
  A.topRightCorner(n, ne) = Be;
  A.bottomLeftCorner(ne, n) = Ce;
  A.bottomRightCorner(ne, ne) = Dee;
  B.topRows(n) = Bk;
  B.bottomRows(ne) = Dek;
  C.leftCols(n) = Ck;
  C.rightCols(ne) = Dke;
  return DescriptorSystem<Scalar>(E, A, B, C, Dkk);
}

}  // namespace impnet
