#include "impnet/frames.hpp"

#include <cmath>

#include "impnet/errors.hpp"

namespace impnet {
namespace {

void require_ports(const ComplexDescriptor& g, Index n, const char* what) {
  if (g.inputs() != n || g.outputs() != n) throw DimensionMismatch(what);
}

ComplexDescriptor similarity(const ComplexDescriptor& g, const MatXc& left,
                             const MatXc& right) {
  return transform_inputs(transform_outputs(g, left), right);
}

MatXc acdc_expand(const Mat2c& t) {
  MatXc m = MatXc::Identity(3, 3);
  m.topLeftCorner(2, 2) = t;
  return m;
}

}  // namespace

ComplexDescriptor to_pn(const ComplexDescriptor& dq_block) {
  require_ports(dq_block, 2, "to_pn: block must be 2x2");
  return similarity(dq_block, sym_matrix(), sym_matrix_inverse());
}

ComplexDescriptor to_dq(const ComplexDescriptor& pn_block) {
  require_ports(pn_block, 2, "to_dq: block must be 2x2");
  return similarity(pn_block, sym_matrix_inverse(), sym_matrix());
}

ComplexDescriptor to_pn_acdc(const ComplexDescriptor& dq_block) {
  require_ports(dq_block, 3, "to_pn_acdc: block must be 3x3");
  return similarity(dq_block, acdc_expand(sym_matrix()), acdc_expand(sym_matrix_inverse()));
}

ComplexDescriptor to_dq_acdc(const ComplexDescriptor& pn_block) {
  require_ports(pn_block, 3, "to_dq_acdc: block must be 3x3");
  return similarity(pn_block, acdc_expand(sym_matrix_inverse()), acdc_expand(sym_matrix()));
}

RealDescriptor rereference(const RealDescriptor& local_block, double theta) {
  if (local_block.inputs() != 2 || local_block.outputs() != 2)
    throw DimensionMismatch("rereference: block must be 2x2");
  return transform_inputs(transform_outputs(local_block, MatXd(rot_dq(-theta))),
                          MatXd(rot_dq(theta)));
}

ComplexDescriptor rereference(const ComplexDescriptor& local_block, double theta) {
  require_ports(local_block, 2, "rereference: block must be 2x2");
  return similarity(local_block, rot_dq(-theta).cast<Complex>(),
                    rot_dq(theta).cast<Complex>());
}

ComplexDescriptor rereference_pn(const ComplexDescriptor& local_block, double theta) {
  require_ports(local_block, 2, "rereference_pn: block must be 2x2");
  return similarity(local_block, rot_pn(-theta), rot_pn(theta));
}

RealDescriptor rereference_acdc(const RealDescriptor& local_block, double theta) {
  if (local_block.inputs() != 3 || local_block.outputs() != 3)
    throw DimensionMismatch("rereference_acdc: block must be 3x3");
  MatXd fwd = MatXd::Identity(3, 3), bwd = MatXd::Identity(3, 3);
  fwd.topLeftCorner(2, 2) = rot_dq(theta);
  bwd.topLeftCorner(2, 2) = rot_dq(-theta);
  return transform_inputs(transform_outputs(local_block, bwd), fwd);
}

ComplexDescriptor rereference_acdc(const ComplexDescriptor& local_block, double theta) {
  require_ports(local_block, 3, "rereference_acdc: block must be 3x3");
  return similarity(local_block, acdc_expand(rot_dq(-theta).cast<Complex>()),
                    acdc_expand(rot_dq(theta).cast<Complex>()));
}

bool is_dq_symmetric(const ComplexDescriptor& dq_block, double tol) {
  if (dq_block.inputs() != 2 || dq_block.outputs() != 2) return false;
  const Complex probes[] = {{0.4, 7.0}, {1.5, -90.0}, {-0.2, 300.0}, {2.0, 1.0}};
  for (Complex s : probes) {
    MatXc h = evaluate(dq_block, s);
    const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    if (std::abs(h(0, 0) - h(1, 1)) > tol * scale) return false;
    if (std::abs(h(0, 1) + h(1, 0)) > tol * scale) return false;
  }
  return true;
}

std::pair<Complex, Complex> eigen_pair(const Mat2c& m) {
  const Complex tr = m(0, 0) + m(1, 1);
  const Complex det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  const Complex disc = std::sqrt(tr * tr - 4.0 * det);
  return {0.5 * (tr + disc), 0.5 * (tr - disc)};
}

std::array<std::vector<Complex>, 2> eigen_loci(const std::vector<Mat2c>& values) {
  std::array<std::vector<Complex>, 2> tracks;
  tracks[0].reserve(values.size());
  tracks[1].reserve(values.size());
  for (const Mat2c& m : values) {
    auto [a, b] = eigen_pair(m);
    if (!tracks[0].empty()) {
      const Complex pa = tracks[0].back(), pb = tracks[1].back();
      if (std::abs(a - pa) + std::abs(b - pb) > std::abs(b - pa) + std::abs(a - pb))
        std::swap(a, b);
    }
    tracks[0].push_back(a);
    tracks[1].push_back(b);
  }
  return tracks;
}

}  // namespace impnet
