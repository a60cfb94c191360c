#pragma once

#include <random>

#include "impnet/descriptor.hpp"
#include "impnet/types.hpp"

namespace impnet::testing {

inline MatXd random_matrix(std::mt19937& rng, Index rows, Index cols) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  MatXd m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

inline MatXc random_cmatrix(std::mt19937& rng, Index rows, Index cols) {
  MatXc m = random_matrix(rng, rows, cols).cast<Complex>();
  m += Complex(0, 1) * random_matrix(rng, rows, cols).cast<Complex>();
  return m;
}

inline double max_abs_diff(const MatXc& a, const MatXc& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

inline RealDescriptor random_system(std::mt19937& rng, Index n, Index outs, Index ins,
                                    bool regular_e = true) {
  MatXd e = random_matrix(rng, n, n);
  if (regular_e) e += 3.0 * MatXd::Identity(n, n);
  return RealDescriptor(e, random_matrix(rng, n, n), random_matrix(rng, n, ins),
                        random_matrix(rng, outs, n), random_matrix(rng, outs, ins));
}

/// Random block of the form a(s) I + b(s) J with J the quarter-turn matrix:
/// commutes with every planar rotation.
inline RealDescriptor random_rotation_symmetric(std::mt19937& rng, Index n_each) {
  RealDescriptor a = random_system(rng, n_each, 1, 1);
  RealDescriptor b = random_system(rng, n_each, 1, 1);
  MatXd j(2, 2);
  j << 0.0, 1.0, -1.0, 0.0;
  return add(block_diag(a, a), transform_outputs(block_diag(b, b), j));
}

}  // namespace impnet::testing
