#include "impnet/powerflow.hpp"

#include <cmath>
#include <complex>
#include <vector>

#include "impnet/errors.hpp"

namespace impnet::powerflow {
namespace {

void validate(const PowerflowSpec& spec) {
  if (spec.n < 1) throw InvalidNetwork("power flow: need at least one bus");
  if (spec.slack < 0 || spec.slack >= spec.n)
    throw InvalidNetwork("power flow: fixed-voltage bus index out of range");
  if (spec.slack_mag <= 0.0)
    throw InvalidOperatingPoint("power flow: fixed-voltage magnitude must be positive");
  if (spec.ybus.rows() != spec.n || spec.ybus.cols() != spec.n ||
      spec.injections.size() != spec.n)
    throw DimensionMismatch("power flow: ybus or injection size does not match bus count");
}

}  // namespace

PowerflowSpec PowerflowSpec::empty(Index n_buses) {
  PowerflowSpec spec;
  spec.n = n_buses;
  spec.ybus = MatXc::Zero(n_buses, n_buses);
  spec.injections = VecXc::Zero(n_buses);
  return spec;
}

void add_branch(PowerflowSpec& spec, Index a, Index b, const BranchParams& p) {
  if (a < 0 || a >= spec.n || b < 0 || b >= spec.n || a == b)
    throw InvalidNetwork("power flow: branch endpoints out of range");
  const Complex y = 1.0 / Complex(p.r, p.x);
  spec.ybus(a, a) += y;
  spec.ybus(b, b) += y;
  spec.ybus(a, b) -= y;
  spec.ybus(b, a) -= y;
}

void add_shunt(PowerflowSpec& spec, Index bus, Complex y) {
  if (bus < 0 || bus >= spec.n) throw InvalidNetwork("power flow: shunt bus out of range");
  spec.ybus(bus, bus) += y;
}

PowerflowSolution solve_powerflow(const PowerflowSpec& spec) {
  validate(spec);
  const Index n = spec.n;
  std::vector<Index> free_bus;
  free_bus.reserve(n - 1);
  for (Index k = 0; k < n; ++k)
    if (k != spec.slack) free_bus.push_back(k);
  const Index m = static_cast<Index>(free_bus.size());

  VecXc v = VecXc::Ones(n);
  v(spec.slack) = spec.slack_mag;

  const Complex jj(0.0, 1.0);
  for (Index iter = 1; iter <= 50; ++iter) {
    const VecXc i_bus = spec.ybus * v;
    const VecXc s_calc = v.array() * i_bus.conjugate().array();
    double gnorm = 0.0;
    for (Index a = 0; a < m; ++a)
      gnorm = std::max(gnorm, std::abs(s_calc(free_bus[a]) - spec.injections(free_bus[a])));
    if (gnorm < 1e-12) {
      PowerflowSolution sol;
      sol.v = v;
      sol.slack_injection = s_calc(spec.slack);
      sol.iterations = iter - 1;
      return sol;
    }
    if (!std::isfinite(gnorm) || gnorm > 1e8)
      throw NoConvergence("power flow diverged; operating point out of reach");

    MatXd jac(2 * m, 2 * m);
    VecXd rhs(2 * m);
    for (Index a = 0; a < m; ++a) {
      const Index i = free_bus[a];
      const Complex g = s_calc(i) - spec.injections(i);
      rhs(2 * a) = g.real();
      rhs(2 * a + 1) = g.imag();
      for (Index b = 0; b < m; ++b) {
        const Index k = free_bus[b];
        Complex ds_de = v(i) * std::conj(spec.ybus(i, k));
        Complex ds_df = -jj * v(i) * std::conj(spec.ybus(i, k));
        if (i == k) {
          ds_de += std::conj(i_bus(i));
          ds_df += jj * std::conj(i_bus(i));
        }
        jac(2 * a, 2 * b) = ds_de.real();
        jac(2 * a, 2 * b + 1) = ds_df.real();
        jac(2 * a + 1, 2 * b) = ds_de.imag();
        jac(2 * a + 1, 2 * b + 1) = ds_df.imag();
      }
    }
    Eigen::PartialPivLU<MatXd> lu(jac);
    if (!(lu.rcond() > 1e-14))
      throw NoConvergence("power flow Jacobian is singular at the current iterate");
    const VecXd dx = lu.solve(rhs);
    for (Index a = 0; a < m; ++a) v(free_bus[a]) -= Complex(dx(2 * a), dx(2 * a + 1));
  }
  throw NoConvergence("power flow did not reach 1e-12 in 50 iterations");
}

AcOperatingPoint device_operating_point(Complex v, Complex s_inj) {
  AcOperatingPoint op;
  op.u_mag = std::abs(v);
  op.theta = std::arg(v);
  op.p = s_inj.real();
  op.q = s_inj.imag();
  return op;
}

double dc_port_power(Complex s_inj, Complex v, double rf) {
  const double i_mag = std::abs(s_inj) / std::abs(v);
  return s_inj.real() + rf * i_mag * i_mag;
}

}  // namespace impnet::powerflow
