#include "impnet/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "impnet/errors.hpp"
#include "impnet/pencil.hpp"

namespace impnet::oracle {
namespace {

using Mode = VscParams::Mode;

struct Dims {
  Index nx, nu;
};

Dims dims_of(const VscParams& p) {
  switch (p.mode) {
    case Mode::PowerControl:
      return {8, 2};
    case Mode::DcVoltageControl:
      return {8, 3};
    case Mode::VoltageFrequencyControl:
    default:
      return {6, 3};
  }
}

// Control and modulation signals shared by the state derivatives and the
// outputs, templated so complex-step perturbations flow through every branch.
template <typename T>
struct Signals {
  T uld{}, ulq{}, vd{}, vq{}, ed{}, eq{}, dw{}, wpu{}, p{}, q{};
};

template <typename T>
Signals<T> eval_signals(const VscParams& prm, const VscGains& g,
                        const AcOperatingPoint& op, const DcOperatingPoint& dcop,
                        const VecX<T>& x, const VecX<T>& u) {
  using std::cos;
  using std::sin;
  Signals<T> sg;
  if (prm.mode == Mode::VoltageFrequencyControl) {
    const T id = x(0), iq = x(1), xcd = x(2), xcq = x(3), xvd = x(4), xvq = x(5);
    sg.uld = u(0);
    sg.ulq = u(1);
    const T idref = g.kp_v * (op.u_mag - sg.uld) + g.ki_v * xvd;
    const T iqref = g.kp_v * (0.0 - sg.ulq) + g.ki_v * xvq;
    sg.ed = idref - id;
    sg.eq = iqref - iq;
    const T vrefd = g.kp_c * sg.ed + g.ki_c * xcd - prm.lf * iq;
    const T vrefq = g.kp_c * sg.eq + g.ki_c * xcq + prm.lf * id;
    const T run = u(2) / dcop.u_dc;
    sg.vd = vrefd * run;
    sg.vq = vrefq * run;
    sg.wpu = T(1.0);
    return sg;
  }

  const T id = x(0), iq = x(1), delta = x(2), xp = x(3), xcd = x(4), xcq = x(5);
  const T c = cos(delta), s = sin(delta);
  sg.uld = c * u(0) + s * u(1);
  sg.ulq = -s * u(0) + c * u(1);
  sg.p = sg.uld * id + sg.ulq * iq;
  sg.q = sg.ulq * id - sg.uld * iq;
  sg.dw = g.kp_pll * sg.ulq + g.ki_pll * xp;
  sg.wpu = 1.0 + sg.dw / kOmegaBase;
  T idref;
  if (prm.mode == Mode::PowerControl)
    idref = g.kp_od * (op.p - sg.p) + g.ki_od * x(6);
  else
    idref = g.kp_dc * (u(2) - dcop.u_dc) + g.ki_dc * x(6);
  const T iqref = -(g.kp_oq * (op.q - sg.q) + g.ki_oq * x(7));
  sg.ed = idref - id;
  sg.eq = iqref - iq;
  const T vrefd = sg.uld + g.kp_c * sg.ed + g.ki_c * xcd - prm.lf * iq;
  const T vrefq = sg.ulq + g.kp_c * sg.eq + g.ki_c * xcq + prm.lf * id;
  if (prm.mode == Mode::DcVoltageControl) {
    const T run = u(2) / dcop.u_dc;
    sg.vd = vrefd * run;
    sg.vq = vrefq * run;
  } else {
    sg.vd = vrefd;
    sg.vq = vrefq;
  }
  return sg;
}

}  // namespace

Index VscDeviceModel::states() const { return dims_of(params).nx; }
Index VscDeviceModel::ports() const { return dims_of(params).nu; }

VecXd VscDeviceModel::mass() const {
  VecXd m = VecXd::Ones(states());
  const double lt = params.lf / kOmegaBase;
  m(0) = lt;
  m(1) = lt;
  return m;
}

VecXd VscDeviceModel::steady() const {
  const VscGains g = vsc_gains(params);
  if (op.u_mag <= 0.0) throw InvalidOperatingPoint("converter: bus voltage must be positive");
  const double id0 = op.p / op.u_mag, iq0 = -op.q / op.u_mag;
  VecXd x = VecXd::Zero(states());
  switch (params.mode) {
    case Mode::PowerControl:
      x << id0, iq0, op.theta, 0.0, params.rf * id0 / g.ki_c, params.rf * iq0 / g.ki_c,
          id0 / g.ki_od, -iq0 / g.ki_oq;
      break;
    case Mode::DcVoltageControl:
      x << id0, iq0, op.theta, 0.0, params.rf * id0 / g.ki_c, params.rf * iq0 / g.ki_c,
          id0 / g.ki_dc, -iq0 / g.ki_oq;
      break;
    case Mode::VoltageFrequencyControl:
      if (op.theta != 0.0)
        throw InvalidOperatingPoint(
            "grid-forming converter defines the reference frame; theta must be zero");
      x << id0, iq0, (op.u_mag + params.rf * id0) / g.ki_c, params.rf * iq0 / g.ki_c,
          id0 / g.ki_v, iq0 / g.ki_v;
      break;
  }
  return x;
}

VecXd VscDeviceModel::steady_inputs() const {
  VecXd u(ports());
  u(0) = op.u_mag * std::cos(op.theta);
  u(1) = op.u_mag * std::sin(op.theta);
  if (ports() == 3) u(2) = dc.u_dc;
  return u;
}

template <typename T>
VecX<T> VscDeviceModel::rhs(const VecX<T>& x, const VecX<T>& u) const {
  const VscGains g = vsc_gains(params);
  const Signals<T> sg = eval_signals(params, g, op, dc, x, u);
  const T id = x(0), iq = x(1);
  VecX<T> dx(states());
  dx(0) = sg.vd - sg.uld - params.rf * id + sg.wpu * params.lf * iq;
  dx(1) = sg.vq - sg.ulq - params.rf * iq - sg.wpu * params.lf * id;
  if (params.mode == Mode::VoltageFrequencyControl) {
    dx(2) = sg.ed;
    dx(3) = sg.eq;
    dx(4) = op.u_mag - sg.uld;
    dx(5) = -sg.ulq;
    return dx;
  }
  dx(2) = sg.dw;
  dx(3) = sg.ulq;
  dx(4) = sg.ed;
  dx(5) = sg.eq;
  if (params.mode == Mode::PowerControl) {
    dx(6) = op.p - sg.p;
    dx(7) = op.q - sg.q;
  } else {
    dx(6) = u(2) - dc.u_dc;
    dx(7) = op.q - sg.q;
  }
  return dx;
}

template <typename T>
VecX<T> VscDeviceModel::out(const VecX<T>& x, const VecX<T>& u) const {
  using std::cos;
  using std::sin;
  const VscGains g = vsc_gains(params);
  const Signals<T> sg = eval_signals(params, g, op, dc, x, u);
  const T id = x(0), iq = x(1);
  VecX<T> y(ports());
  if (params.mode == Mode::VoltageFrequencyControl) {
    y(0) = -id;
    y(1) = -iq;
  } else {
    const T delta = x(2);
    const T c = cos(delta), s = sin(delta);
    y(0) = -(c * id - s * iq);
    y(1) = -(s * id + c * iq);
  }
  if (ports() == 3) y(2) = (sg.vd * id + sg.vq * iq) / u(2);
  return y;
}

template VecX<double> VscDeviceModel::rhs(const VecX<double>&, const VecX<double>&) const;
template VecX<Complex> VscDeviceModel::rhs(const VecX<Complex>&, const VecX<Complex>&) const;
template VecX<double> VscDeviceModel::out(const VecX<double>&, const VecX<double>&) const;
template VecX<Complex> VscDeviceModel::out(const VecX<Complex>&, const VecX<Complex>&) const;

RealDescriptor VscDeviceModel::linearize() const {
  const VecXd x0 = steady();
  const VecXd u0 = steady_inputs();
  const VecXc u0c = u0.cast<Complex>();
  const VecXc x0c = x0.cast<Complex>();
  const Index nx = states(), nu = ports();
  MatXd a = complex_step_jacobian([&](const VecXc& z) { return rhs<Complex>(z, u0c); }, x0, nx);
  MatXd b = complex_step_jacobian([&](const VecXc& z) { return rhs<Complex>(x0c, z); }, u0, nx);
  MatXd c = complex_step_jacobian([&](const VecXc& z) { return out<Complex>(z, u0c); }, x0, nu);
  MatXd d = complex_step_jacobian([&](const VecXc& z) { return out<Complex>(x0c, z); }, u0, nu);
  return RealDescriptor(MatXd(mass().asDiagonal()), a, b, c, d);
}

VecXd VscDeviceModel::steady_residual() const {
  return rhs<double>(steady(), steady_inputs());
}

StackedNetwork::StackedNetwork(const net::NetworkModel& model,
                               const net::NetworkOperatingPoint& op) {
  net::validate(model);
  build(model, op);
}

void StackedNetwork::build(const net::NetworkModel& model,
                           const net::NetworkOperatingPoint& op) {
  model_ = model;
  op_ = op;
  const Index ndev = static_cast<Index>(model_.devices.size());
  const Index nbr = static_cast<Index>(model_.branches.size());
  const Index nlink = static_cast<Index>(model_.links.size());

  dev_.clear();
  dev_link_.assign(ndev, -1);
  for (Index l = 0; l < nlink; ++l) {
    dev_link_[model_.links[l].sending] = l;
    dev_link_[model_.links[l].receiving] = l;
  }
  dev_off_.resize(ndev);
  Index off = 0;
  for (Index d = 0; d < ndev; ++d) {
    dev_.push_back(VscDeviceModel{model_.devices[d].params, op_.device_ac[d],
                                  op_.device_dc[d]});
    dev_off_[d] = off;
    off += dev_.back().states();
  }
  br_off_.resize(nbr);
  for (Index i = 0; i < nbr; ++i) {
    br_off_[i] = off;
    off += 2;
  }
  zs_off_ = -1;
  if (model_.has_grid) {
    zs_off_ = off;
    off += 2;
  }
  bus_off_.resize(model_.buses);
  for (Index b = 0; b < model_.buses; ++b) {
    bus_off_[b] = off;
    off += 2;
  }
  link_off_.resize(nlink);
  for (Index l = 0; l < nlink; ++l) link_off_[l] = off++;
  n_ = off;

  bus_shunt_ = VecXd::Zero(model_.buses);
  for (const net::Shunt& sh : model_.shunts) bus_shunt_(sh.bus) += sh.c;

  mass_ = VecXd::Zero(n_);
  steady_ = VecXd::Zero(n_);
  for (Index d = 0; d < ndev; ++d) {
    mass_.segment(dev_off_[d], dev_[d].states()) = dev_[d].mass();
    steady_.segment(dev_off_[d], dev_[d].states()) = dev_[d].steady();
  }
  for (Index i = 0; i < nbr; ++i) {
    const net::Branch& br = model_.branches[i];
    mass_(br_off_[i]) = mass_(br_off_[i] + 1) = br.params.x / kOmegaBase;
    const Complex flow = (op_.bus_v(br.from) - op_.bus_v(br.to)) /
                         Complex(br.params.r, br.params.x);
    steady_(br_off_[i]) = flow.real();
    steady_(br_off_[i] + 1) = flow.imag();
  }
  if (zs_off_ >= 0) {
    const net::TheveninSource& g = model_.grid;
    mass_(zs_off_) = mass_(zs_off_ + 1) = g.zs.x / kOmegaBase;
    const Complex flow = (Complex(g.emf, 0.0) - op_.bus_v(g.bus)) / Complex(g.zs.r, g.zs.x);
    steady_(zs_off_) = flow.real();
    steady_(zs_off_ + 1) = flow.imag();
  }
  for (Index b = 0; b < model_.buses; ++b) {
    mass_(bus_off_[b]) = mass_(bus_off_[b] + 1) = bus_shunt_(b) / kOmegaBase;
    steady_(bus_off_[b]) = op_.bus_v(b).real();
    steady_(bus_off_[b] + 1) = op_.bus_v(b).imag();
  }
  for (Index l = 0; l < nlink; ++l) {
    mass_(link_off_[l]) = model_.links[l].cap_c / kOmegaBase;
    steady_(link_off_[l]) = op_.device_dc[model_.links[l].sending].u_dc;
  }
}

StackedNetwork StackedNetwork::dc_probe(const net::NetworkModel& model,
                                        const net::NetworkOperatingPoint& op, Index device) {
  net::validate(model);
  if (device < 0 || device >= static_cast<Index>(model.devices.size()))
    throw InvalidNetwork("device index out of range");
  Index link = -1;
  for (Index l = 0; l < static_cast<Index>(model.links.size()); ++l)
    if (model.links[l].sending == device || model.links[l].receiving == device) link = l;
  if (link < 0) throw InvalidNetwork("device has no dc link to probe");

  const std::vector<Index> area = net::bus_areas(model);
  const Index a = area[model.devices[device].bus];
  net::NetworkModel sub;
  std::vector<Index> map(model.buses, -1);
  for (Index b = 0; b < model.buses; ++b)
    if (area[b] == a) map[b] = sub.buses++;
  for (const net::Branch& br : model.branches)
    if (area[br.from] == a)
      sub.branches.push_back({br.name, map[br.from], map[br.to], br.params});
  for (const net::Shunt& sh : model.shunts)
    if (area[sh.bus] == a) sub.shunts.push_back({map[sh.bus], sh.c});
  if (model.has_grid && area[model.grid.bus] == a) {
    sub.has_grid = true;
    sub.grid = {map[model.grid.bus], model.grid.emf, model.grid.zs};
  }
  net::NetworkOperatingPoint sop;
  sop.bus_v = VecXc::Zero(sub.buses);
  for (Index b = 0; b < model.buses; ++b)
    if (map[b] >= 0) sop.bus_v(map[b]) = op.bus_v(b);
  sop.grid_injection = op.grid_injection;
  Index probe_local = -1;
  for (Index d = 0; d < static_cast<Index>(model.devices.size()); ++d) {
    const net::Device& dev = model.devices[d];
    if (area[dev.bus] != a) continue;
    net::Device copy = dev;
    copy.bus = map[dev.bus];
    if (d == device) probe_local = static_cast<Index>(sub.devices.size());
    sub.devices.push_back(copy);
    sop.device_ac.push_back(op.device_ac[d]);
    sop.device_dc.push_back(op.device_dc[d]);
  }

  StackedNetwork s;
  s.build(sub, sop);
  s.probe_device_ = probe_local;
  s.probe_dc0_ = op.device_dc[device].u_dc;
  return s;
}

VecXd StackedNetwork::steady_residual() const { return f<double>(steady_); }

std::vector<Complex> StackedNetwork::eigenvalues() const {
  const MatXd a =
      complex_step_jacobian([&](const VecXc& z) { return f<Complex>(z); }, steady_, n_);
  return pencil_eigenvalues(a.cast<Complex>(),
                            MatXc(mass_.cast<Complex>().asDiagonal()))
      .finite;
}

RealDescriptor StackedNetwork::dc_port_block() const {
  if (probe_device_ < 0)
    throw WrongKind("the dc port block is only defined for dc probe stacks");
  const VscDeviceModel& m = dev_[probe_device_];
  const Index bus = model_.devices[probe_device_].bus;
  const double h = 1e-100;
  const Complex u0(probe_dc0_, 0.0);

  const MatXd a = complex_step_jacobian(
      [&](const VecXc& z) { return f_forced<Complex>(z, u0); }, steady_, n_);
  const VecXc fcol = f_forced<Complex>(steady_.cast<Complex>().eval(), Complex(probe_dc0_, h));
  MatXd b(n_, 1);
  for (Index i = 0; i < n_; ++i) b(i, 0) = fcol(i).imag() / h;

  const auto ydc = [&](const VecXc& z, Complex udc) {
    VecXc u(3);
    u(0) = z(bus_off_[bus]);
    u(1) = z(bus_off_[bus] + 1);
    u(2) = udc;
    return m.out<Complex>(VecXc(z.segment(dev_off_[probe_device_], m.states())), u)(2);
  };
  MatXd c(1, n_);
  for (Index k = 0; k < n_; ++k) {
    VecXc z = steady_.cast<Complex>();
    z(k) += Complex(0.0, h);
    c(0, k) = ydc(z, u0).imag() / h;
  }
  MatXd d(1, 1);
  d(0, 0) = ydc(steady_.cast<Complex>().eval(), Complex(probe_dc0_, h)).imag() / h;
  return RealDescriptor(MatXd(mass_.asDiagonal()), a, b, c, d);
}

StackedNetwork::Simulation StackedNetwork::simulate(const VecXd& z0, double dt, Index steps,
                                                    double guard) const {
  if (probe_device_ >= 0)
    throw WrongKind("simulation runs on the full stack, not a dc probe");
  if (z0.size() != n_ || dt <= 0.0 || steps < 1)
    throw DimensionMismatch("simulation needs a full-size initial state and dt > 0");
  const MatXd a0 =
      complex_step_jacobian([&](const VecXc& z) { return f<Complex>(z); }, steady_, n_);
  const MatXd e = MatXd(mass_.asDiagonal());
  const Eigen::PartialPivLU<MatXd> lu_be(e - dt * a0);
  const Eigen::PartialPivLU<MatXd> lu_tr(e - 0.5 * dt * a0);

  Simulation sim;
  sim.dt = dt;
  sim.z = MatXd(n_, steps + 1);
  sim.z.col(0) = z0;
  VecXd zp = z0;
  for (Index step = 1; step <= steps; ++step) {
    const bool first = step == 1;
    const VecXd fzp = f<double>(zp);
    VecXd zn = zp;
    bool ok = false;
    for (int it = 0; it < 25 && !ok; ++it) {
      const VecXd g = first ? VecXd(e * (zn - zp) - dt * f<double>(zn))
                            : VecXd(e * (zn - zp) - 0.5 * dt * (f<double>(zn) + fzp));
      const VecXd delta = first ? lu_be.solve(-g) : lu_tr.solve(-g);
      zn += delta;
      ok = delta.lpNorm<Eigen::Infinity>() <
           1e-12 * std::max(1.0, zn.lpNorm<Eigen::Infinity>());
    }
    if (!ok) throw NoConvergence("integrator step did not converge");
    if (!zn.allFinite() || zn.lpNorm<Eigen::Infinity>() > guard) {
      sim.truncated = true;
      sim.z.conservativeResize(n_, step);
      return sim;
    }
    sim.z.col(step) = zn;
    zp = zn;
  }
  return sim;
}

std::vector<Complex> closed_loop_eigenvalues(const net::NetworkModel& model,
                                             const net::NetworkOperatingPoint& op) {
  return StackedNetwork(model, op).eigenvalues();
}

DominantMode dominant_mode(const VecXd& signal, double dt) {
  if (signal.size() < 16 || dt <= 0.0)
    throw DimensionMismatch("dominant mode needs a sampled signal and dt > 0");
  const Index n = signal.size();
  const VecXd x = signal.array() - signal.mean();
  VecXd w(n);
  for (Index i = 0; i < n; ++i)
    w(i) = 0.5 * (1.0 - std::cos(2.0 * kPi * i / static_cast<double>(n - 1)));
  const double wsum = w.sum();

  const double f_lo = 2.0, f_hi = 100.0, df = 0.1;
  const Index bins = static_cast<Index>(std::lround((f_hi - f_lo) / df)) + 1;
  VecXd amp(bins);
  for (Index k = 0; k < bins; ++k) {
    const double f = f_lo + df * k;
    const Complex rot = std::polar(1.0, -2.0 * kPi * f * dt);
    Complex phase(1.0, 0.0);
    Complex acc(0.0, 0.0);
    for (Index i = 0; i < n; ++i) {
      acc += w(i) * x(i) * phase;
      phase *= rot;
    }
    amp(k) = std::abs(acc);
  }
  Index peak = 0;
  amp.maxCoeff(&peak);
  double shift = 0.0;
  if (peak > 0 && peak + 1 < bins) {
    const double am = amp(peak - 1), a0 = amp(peak), ap = amp(peak + 1);
    const double denom = am - 2.0 * a0 + ap;
    if (denom != 0.0) shift = std::clamp(0.5 * (am - ap) / denom, -0.5, 0.5);
  }
  DominantMode mode;
  mode.freq_hz = f_lo + df * (peak + shift);
  mode.amplitude = 2.0 * amp(peak) / wsum;
  return mode;
}

}  // namespace impnet::oracle
