#include "impnet/pencil.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "impnet/errors.hpp"

namespace impnet {
namespace {

// Osborne balancing by powers of two: similarity D^{-1} K D equalizing
// off-diagonal row and column 1-norms. Exact in floating point, and needed
// because ComplexEigenSolver does not balance internally.
void balance_in_place(MatXc& k) {
  const Index n = k.rows();
  for (int sweep = 0; sweep < 20; ++sweep) {
    bool changed = false;
    for (Index i = 0; i < n; ++i) {
      double c = 0.0, r = 0.0;
      for (Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(k(j, i));
        r += std::abs(k(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double f = 1.0;
      while (c < r / 2.0) {
        c *= 2.0;
        r /= 2.0;
        f *= 2.0;
      }
      while (c > r * 2.0) {
        c /= 2.0;
        r *= 2.0;
        f /= 2.0;
      }
      if (f != 1.0) {
        changed = true;
        k.col(i) *= f;
        k.row(i) /= f;
      }
    }
    if (!changed) break;
  }
}

struct ShiftSolve {
  std::vector<Complex> finite;
  Index infinite = 0;
  double lambda_max = 0.0;
  bool ok = false;
};

// Trial angles stay away from the axes, where physical spectra cluster.
constexpr double kShiftAngles[] = {1.09, 2.31, 0.57, 2.9, 1.7};

ShiftSolve solve_at_radius(const MatXc& m, const MatXc& n_mat, double rho) {
  const Index n = m.rows();
  ShiftSolve out;
  for (double theta : kShiftAngles) {
    const Complex sigma = std::polar(rho, theta);
    const MatXc shifted = m - sigma * n_mat;
    VecXd r, c;
    detail::equilibrate(shifted, r, c);
    Eigen::PartialPivLU<MatXc> lu(r.asDiagonal() * shifted * c.asDiagonal());
    if (!(lu.rcond() > 1e-12)) continue;
    // scaled^{-1} (R N C) is diagonally similar to (M - sigma N)^{-1} N, so
    // its eigenvalues are exactly the kappa values wanted.
    MatXc k = lu.solve(r.asDiagonal() * n_mat * c.asDiagonal());
    balance_in_place(k);
    Eigen::ComplexEigenSolver<MatXc> es(k, false);
    if (es.info() != Eigen::Success) continue;
    // Finite eigenvalues inside the search disc give |kappa| rho >= O(1);
    // rounding noise from infinite (nilpotent) structure of block size up to
    // four stays below 1e-3, so the 1e-2 split is unambiguous.
    const double threshold = 1e-2 / rho;
    for (Index i = 0; i < n; ++i) {
      const Complex kappa = es.eigenvalues()(i);
      if (std::abs(kappa) < threshold) {
        ++out.infinite;
        continue;
      }
      const Complex lambda = sigma + 1.0 / kappa;
      out.finite.push_back(lambda);
      out.lambda_max = std::max(out.lambda_max, std::abs(lambda));
    }
    out.ok = true;
    return out;
  }
  return out;
}

bool complex_less(const Complex& a, const Complex& b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

}  // namespace

PencilEigenvalues pencil_eigenvalues(const MatXc& m, const MatXc& n_mat) {
  if (m.rows() != m.cols() || n_mat.rows() != m.rows() || n_mat.cols() != m.cols())
    throw DimensionMismatch("pencil_eigenvalues: matrices must be square and equal-sized");
  PencilEigenvalues out;
  if (m.rows() == 0) return out;

  // Pass 1: wide radius to locate the extent of the finite spectrum. The
  // eigenvalue accuracy here is poor but sufficient for a radius estimate.
  ShiftSolve estimate = solve_at_radius(m, n_mat, 1e9);
  if (!estimate.ok)
    throw IrregularPencil("pencil_eigenvalues: no trial shift gives an invertible pencil");

  // Pass 2 at a tight radius for accuracy; regrow if eigenvalues show up near
  // the edge of the search disc.
  double rho = std::max(1e3, 10.0 * std::max(1.0, estimate.lambda_max));
  ShiftSolve solved;
  for (int pass = 0; pass < 3; ++pass) {
    solved = solve_at_radius(m, n_mat, rho);
    if (!solved.ok)
      throw IrregularPencil("pencil_eigenvalues: no trial shift gives an invertible pencil");
    if (solved.lambda_max <= 50.0 * rho) break;
    rho = std::max(rho * 10.0, 10.0 * solved.lambda_max);
  }

  out.finite = std::move(solved.finite);
  out.infinite = solved.infinite;
  std::sort(out.finite.begin(), out.finite.end(), complex_less);
  return out;
}

std::vector<Complex> poles(const ComplexDescriptor& g) {
  return pencil_eigenvalues(g.A, g.E).finite;
}

std::vector<Complex> invariant_zeros(const ComplexDescriptor& g) {
  if (!g.square()) throw NonSquareSystem("invariant_zeros: block must be square");
  const Index n = g.states(), p = g.inputs();
  MatXc m(n + p, n + p), e(n + p, n + p);
  m.topLeftCorner(n, n) = g.A;
  m.topRightCorner(n, p) = g.B;
  m.bottomLeftCorner(p, n) = g.C;
  m.bottomRightCorner(p, p) = g.D;
  e.setZero();
  e.topLeftCorner(n, n) = g.E;
  return pencil_eigenvalues(m, e).finite;
}

std::vector<Complex> transmission_zeros(const ComplexDescriptor& g) {
  std::vector<Complex> zeros = invariant_zeros(g);
  std::vector<Complex> modes = poles(g);
  std::vector<bool> used(zeros.size(), false);
  for (const Complex& p : modes) {
    std::size_t best = zeros.size();
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < zeros.size(); ++i) {
      if (used[i]) continue;
      const double d = std::abs(zeros[i] - p);
      if (d < best_dist) {
        best_dist = d;
        best = i;
      }
    }
    if (best == zeros.size()) break;
    const double tol = 1e-7 * std::max({1.0, std::abs(p), std::abs(zeros[best])});
    if (best_dist <= tol) used[best] = true;
  }
  std::vector<Complex> out;
  for (std::size_t i = 0; i < zeros.size(); ++i)
    if (!used[i]) out.push_back(zeros[i]);
  return out;
}

}  // namespace impnet
