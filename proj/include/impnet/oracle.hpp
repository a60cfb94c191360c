#pragma once

#include <functional>
#include <vector>

#include "impnet/components.hpp"
#include "impnet/descriptor.hpp"
#include "impnet/network.hpp"
#include "impnet/types.hpp"

namespace impnet::oracle {

/// Jacobian by complex-step differentiation: exact to rounding because no
/// subtractive cancellation occurs. The map must be analytic in each entry.
template <typename F>
MatXd complex_step_jacobian(F&& f, const VecXd& at, Index rows) {
  const double h = 1e-100;
  MatXd j(rows, at.size());
  for (Index k = 0; k < at.size(); ++k) {
    VecXc z = at.cast<Complex>();
    z(k) += Complex(0.0, h);
    const VecXc fz = f(z);
    for (Index i = 0; i < rows; ++i) j(i, k) = fz(i).imag() / h;
  }
  return j;
}

/// Central-difference Jacobian, as an independent cross-check of the
/// complex-step path.
template <typename F>
MatXd central_diff_jacobian(F&& f, const VecXd& at, Index rows, double h = 1e-6) {
  MatXd j(rows, at.size());
  for (Index k = 0; k < at.size(); ++k) {
    VecXd hi = at, lo = at;
    hi(k) += h;
    lo(k) -= h;
    j.col(k) = (f(hi) - f(lo)) / (2.0 * h);
  }
  return j;
}

/// Nonlinear converter model written independently of the linear blocks: full
/// trigonometric frame handling, explicit power and modulation expressions.
/// Linearizing it by complex step gives the reference admittance the linear
/// components must reproduce to rounding accuracy.
struct VscDeviceModel {
  VscParams params;
  AcOperatingPoint op;
  DcOperatingPoint dc;

  Index states() const;
  Index ports() const;  // 2 for ac-only, 3 with the dc port
  /// Diagonal of the descriptor mass matrix (filter inductance rows).
  VecXd mass() const;
  /// Steady state consistent with the operating point.
  VecXd steady() const;
  /// Inputs at the operating point: global-frame bus voltage (+ dc voltage).
  VecXd steady_inputs() const;

  /// State derivatives scaled by the mass diagonal: mass .* x' = rhs(x, u).
  template <typename T>
  VecX<T> rhs(const VecX<T>& x, const VecX<T>& u) const;

  /// Into-device currents in the global frame (+ dc current into the valve).
  template <typename T>
  VecX<T> out(const VecX<T>& x, const VecX<T>& u) const;

  /// Descriptor linearization at the steady state via complex step.
  RealDescriptor linearize() const;

  /// rhs at the steady state; near-zero entries certify the steady state.
  VecXd steady_residual() const;
};

/// Nonlinear closed loop of a whole network, stacked from first principles:
/// device states, branch currents, bus voltages (algebraic unless a shunt
/// capacitor makes them dynamic), and dc node voltages, closed by Kirchhoff
/// current rows. Built independently of the descriptor composition path so
/// the two routes can certify each other.
class StackedNetwork {
 public:
  StackedNetwork(const net::NetworkModel& model, const net::NetworkOperatingPoint& op);

  /// Variant restricted to the ac area of one dc-coupled converter, with the
  /// dc node voltage exposed as an external input instead of a solved node.
  static StackedNetwork dc_probe(const net::NetworkModel& model,
                                 const net::NetworkOperatingPoint& op, Index device);

  Index size() const { return n_; }
  const VecXd& mass() const { return mass_; }
  const VecXd& steady_state() const { return steady_; }
  VecXd steady_residual() const;

  /// Residual with the probe input pinned to its steady value: E z' = f(z).
  template <typename T>
  VecX<T> f(const VecX<T>& z) const;

  /// Residual with an explicit dc node voltage (probe stacks).
  template <typename T>
  VecX<T> f_forced(const VecX<T>& z, const T& u_dc) const;

  /// Finite eigenvalues of the linearized closed loop.
  std::vector<Complex> eigenvalues() const;

  /// Scalar block from the dc node voltage to the current drawn by this side;
  /// defined for probe stacks only.
  RealDescriptor dc_port_block() const;

  struct Simulation {
    MatXd z;                 // one column per stored sample, initial state first
    double dt = 0.0;
    bool truncated = false;  // the divergence guard stopped the run early
  };
  /// Trapezoidal integration of the nonlinear loop (backward Euler on the
  /// first step) with a frozen Newton matrix; stops when |z| passes guard.
  Simulation simulate(const VecXd& z0, double dt, Index steps, double guard = 1e12) const;

  Index device_offset(Index d) const { return dev_off_[d]; }
  Index bus_offset(Index b) const { return bus_off_[b]; }
  Index link_offset(Index l) const { return link_off_[l]; }

 private:
  StackedNetwork() = default;
  void build(const net::NetworkModel& model, const net::NetworkOperatingPoint& op);

  net::NetworkModel model_;
  net::NetworkOperatingPoint op_;
  std::vector<VscDeviceModel> dev_;
  std::vector<Index> dev_off_, br_off_, bus_off_, link_off_, dev_link_;
  Index zs_off_ = -1;
  VecXd bus_shunt_;
  Index n_ = 0;
  VecXd mass_, steady_;
  Index probe_device_ = -1;
  double probe_dc0_ = 1.0;
};

template <typename T>
VecX<T> StackedNetwork::f_forced(const VecX<T>& z, const T& u_dc) const {
  VecX<T> r = VecX<T>::Zero(n_);
  const auto ub = [&](Index b, int c) { return z(bus_off_[b] + c); };
  for (Index d = 0; d < static_cast<Index>(dev_.size()); ++d) {
    const VscDeviceModel& m = dev_[d];
    const Index b = model_.devices[d].bus;
    const VecX<T> x = z.segment(dev_off_[d], m.states());
    VecX<T> u(m.ports());
    u(0) = ub(b, 0);
    u(1) = ub(b, 1);
    if (m.ports() == 3) {
      if (d == probe_device_)
        u(2) = u_dc;
      else if (dev_link_[d] >= 0)
        u(2) = z(link_off_[dev_link_[d]]);
      else
        u(2) = T(m.dc.u_dc);
    }
    r.segment(dev_off_[d], m.states()) = m.rhs(x, u);
    const VecX<T> y = m.out(x, u);
    r(bus_off_[b]) -= y(0);
    r(bus_off_[b] + 1) -= y(1);
    if (m.ports() == 3 && d != probe_device_ && dev_link_[d] >= 0)
      r(link_off_[dev_link_[d]]) -= y(2);
  }
  for (Index i = 0; i < static_cast<Index>(model_.branches.size()); ++i) {
    const net::Branch& br = model_.branches[i];
    const T id = z(br_off_[i]), iq = z(br_off_[i] + 1);
    r(br_off_[i]) = ub(br.from, 0) - ub(br.to, 0) - br.params.r * id + br.params.x * iq;
    r(br_off_[i] + 1) = ub(br.from, 1) - ub(br.to, 1) - br.params.r * iq - br.params.x * id;
    r(bus_off_[br.from]) -= id;
    r(bus_off_[br.from] + 1) -= iq;
    r(bus_off_[br.to]) += id;
    r(bus_off_[br.to] + 1) += iq;
  }
  if (zs_off_ >= 0) {
    const net::TheveninSource& g = model_.grid;
    const T id = z(zs_off_), iq = z(zs_off_ + 1);
    r(zs_off_) = g.emf - ub(g.bus, 0) - g.zs.r * id + g.zs.x * iq;
    r(zs_off_ + 1) = -ub(g.bus, 1) - g.zs.r * iq - g.zs.x * id;
    r(bus_off_[g.bus]) += id;
    r(bus_off_[g.bus] + 1) += iq;
  }
  for (Index b = 0; b < model_.buses; ++b) {
    if (bus_shunt_(b) == 0.0) continue;
    r(bus_off_[b]) += bus_shunt_(b) * ub(b, 1);
    r(bus_off_[b] + 1) -= bus_shunt_(b) * ub(b, 0);
  }
  return r;
}

template <typename T>
VecX<T> StackedNetwork::f(const VecX<T>& z) const {
  return f_forced(z, T(probe_dc0_));
}

std::vector<Complex> closed_loop_eigenvalues(const net::NetworkModel& model,
                                             const net::NetworkOperatingPoint& op);

struct DominantMode {
  double freq_hz = 0.0;
  double amplitude = 0.0;
};

/// Strongest spectral line of a uniformly sampled signal between 2 and 100 Hz:
/// Hann-windowed transform on a 0.1 Hz grid with parabolic peak refinement.
DominantMode dominant_mode(const VecXd& signal, double dt);

}  // namespace impnet::oracle
