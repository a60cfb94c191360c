#include "impnet/components.hpp"

#include <cmath>

#include "impnet/errors.hpp"

namespace impnet {
namespace {

// Linear-expression helper over (states, inputs): model rows are assembled
// from named expressions instead of scattered index arithmetic.
struct Lin {
  VecXd x, u;
  Lin operator+(const Lin& o) const { return {x + o.x, u + o.u}; }
  Lin operator-(const Lin& o) const { return {x - o.x, u - o.u}; }
};
Lin operator*(double k, const Lin& a) { return {k * a.x, k * a.u}; }

struct LinSpace {
  Index nx, nu;
  Lin state(Index i) const {
    Lin l{VecXd::Zero(nx), VecXd::Zero(nu)};
    l.x(i) = 1.0;
    return l;
  }
  Lin input(Index j) const {
    Lin l{VecXd::Zero(nx), VecXd::Zero(nu)};
    l.u(j) = 1.0;
    return l;
  }
};

struct RowWriter {
  MatXd& a;
  MatXd& b;
  void operator()(Index i, const Lin& rhs) const {
    a.row(i) = rhs.x.transpose();
    b.row(i) = rhs.u.transpose();
  }
};

void check_filter(const VscParams& p) {
  if (p.lf <= 0.0) throw ConfigError("converter: filter reactance lf must be positive");
  if (p.rf < 1e-4)
    throw ConfigError("converter: filter resistance rf below 1e-4 leaves the current "
                      "integrator without a defined steady state");
  if (p.cc_hz <= 0.0 || p.outer_hz <= 0.0)
    throw ConfigError("converter: control bandwidths must be positive");
}

}  // namespace

VscGains vsc_gains(const VscParams& p) {
  check_filter(p);
  const double alpha_c = 2.0 * kPi * p.cc_hz;
  const double zeta = 1.0 / std::sqrt(2.0);
  VscGains g;
  g.kp_c = alpha_c * p.lf / kOmegaBase;
  g.ki_c = alpha_c * p.rf;
  if (p.mode != VscParams::Mode::VoltageFrequencyControl) {
    if (p.pll_hz <= 0.0) throw ConfigError("converter: pll_hz must be positive");
    const double wn = 2.0 * kPi * p.pll_hz;
    g.kp_pll = 2.0 * zeta * wn;
    g.ki_pll = wn * wn;
  }
  const double alpha_q = 2.0 * kPi * (p.q_hz > 0.0 ? p.q_hz : p.outer_hz);
  switch (p.mode) {
    case VscParams::Mode::PowerControl: {
      const double alpha_o = 2.0 * kPi * p.outer_hz;
      g.ki_od = alpha_o;
      g.kp_od = alpha_o / alpha_c;
      g.ki_oq = alpha_q;
      g.kp_oq = alpha_q / alpha_c;
      break;
    }
    case VscParams::Mode::DcVoltageControl: {
      if (p.link_c <= 0.0)
        throw ConfigError("converter: dc-voltage control needs a positive link_c");
      const double ct = p.link_c / kOmegaBase;
      const double wdc = 2.0 * kPi * p.outer_hz;
      g.kp_dc = 2.0 * zeta * wdc * ct;
      g.ki_dc = wdc * wdc * ct;
      g.ki_oq = alpha_q;
      g.kp_oq = alpha_q / alpha_c;
      break;
    }
    case VscParams::Mode::VoltageFrequencyControl: {
      const double alpha_v = 2.0 * kPi * p.outer_hz;
      g.ki_v = alpha_v;
      g.kp_v = alpha_v / alpha_c;
      break;
    }
  }
  return g;
}

RealDescriptor branch_two_port(const BranchParams& p) {
  if (p.x < 0.0 || (p.x == 0.0 && p.r <= 0.0))
    throw ConfigError("branch: needs x > 0 or, for x = 0, r > 0");
  const double lt = p.x / kOmegaBase;
  // State: branch current (d, q) flowing from port 1 to port 2.
  MatXd e = lt * MatXd::Identity(2, 2);
  MatXd a(2, 2), b(2, 4), c(4, 2);
  a << -p.r, p.x, -p.x, -p.r;
  b << 1, 0, -1, 0,
       0, 1, 0, -1;
  c << 1, 0,
       0, 1,
       -1, 0,
       0, -1;
  return RealDescriptor(e, a, b, c, MatXd::Zero(4, 4));
}

RealDescriptor branch_shunt_admittance(const BranchParams& p) {
  if (p.x < 0.0 || (p.x == 0.0 && p.r <= 0.0))
    throw ConfigError("branch: needs x > 0 or, for x = 0, r > 0");
  const double lt = p.x / kOmegaBase;
  MatXd e = lt * MatXd::Identity(2, 2);
  MatXd a(2, 2);
  a << -p.r, p.x, -p.x, -p.r;
  return RealDescriptor(e, a, MatXd::Identity(2, 2), MatXd::Identity(2, 2),
                        MatXd::Zero(2, 2));
}

RealDescriptor differentiator(double c) {
  MatXd e(2, 2), a = MatXd::Identity(2, 2), b(2, 1), cc(1, 2);
  e << 0, 1, 0, 0;
  b << 0, -1;
  cc << c, 0;
  return RealDescriptor(e, a, b, cc, MatXd::Zero(1, 1));
}

RealDescriptor shunt_cap_admittance(double c) {
  if (c <= 0.0) throw ConfigError("shunt capacitor: susceptance must be positive");
  const double ct = c / kOmegaBase;
  MatXd coupling(2, 2);
  coupling << 0, -c, c, 0;
  return add(block_diag(differentiator(ct), differentiator(ct)),
             RealDescriptor::gain(coupling));
}

RealDescriptor branch_series_impedance(const BranchParams& p) {
  if (p.x < 0.0 || (p.x == 0.0 && p.r <= 0.0))
    throw ConfigError("branch: needs x > 0 or, for x = 0, r > 0");
  MatXd zs(2, 2);
  zs << p.r, -p.x, p.x, p.r;
  if (p.x == 0.0) return RealDescriptor::gain(zs);
  const double lt = p.x / kOmegaBase;
  return add(RealDescriptor::gain(zs), block_diag(differentiator(lt), differentiator(lt)));
}

RealDescriptor vsc_admittance(const VscParams& p, const AcOperatingPoint& op) {
  if (p.mode != VscParams::Mode::PowerControl)
    throw ConfigError("vsc_admittance: expects a power-controlled converter");
  const VscGains g = vsc_gains(p);
  if (op.u_mag <= 0.0) throw InvalidOperatingPoint("converter: bus voltage must be positive");
  const double u0 = op.u_mag;
  const double id0 = op.p / u0, iq0 = -op.q / u0;
  const double lt = p.lf / kOmegaBase;

  // States: filter current (d, q), tracked angle, pll integrator, current
  // integrators, power integrators. Inputs: bus voltage in the operating
  // frame. Voltage feed-forward and nominal-frequency decoupling cancel in
  // the current rows; the frame-speed deviation re-enters through the
  // rotating-frame derivative of the filter current.
  LinSpace ls{8, 2};
  const Lin id = ls.state(0), iq = ls.state(1), dlt = ls.state(2), xp = ls.state(3);
  const Lin xcd = ls.state(4), xcq = ls.state(5), xod = ls.state(6), xoq = ls.state(7);
  const Lin ud = ls.input(0), uq = ls.input(1);

  const Lin uqm = uq - (u0)*dlt;                  // measured local q-voltage
  const Lin dw = g.kp_pll * uqm + g.ki_pll * xp;  // frame speed deviation, rad/s
  const Lin pm = u0 * id + id0 * ud + iq0 * uqm;  // measured injected power
  const Lin qm = id0 * uqm - iq0 * ud - u0 * iq;
  const Lin idref = g.ki_od * xod - g.kp_od * pm;
  const Lin iqref = g.kp_oq * qm - g.ki_oq * xoq;
  const Lin ed = idref - id, eq = iqref - iq;

  MatXd e = MatXd::Identity(8, 8);
  e(0, 0) = lt;
  e(1, 1) = lt;
  MatXd a(8, 8), b(8, 2);
  RowWriter row{a, b};
  row(0, g.kp_c * ed + g.ki_c * xcd - p.rf * id + (lt * iq0) * dw);
  row(1, g.kp_c * eq + g.ki_c * xcq - p.rf * iq - (lt * id0) * dw);
  row(2, dw);
  row(3, uqm);
  row(4, ed);
  row(5, eq);
  row(6, -1.0 * pm);
  row(7, -1.0 * qm);

  // Into-device current seen from the operating frame: the tracked angle
  // rotates the injection before it reaches the bus.
  const Lin yd = iq0 * dlt - 1.0 * id;
  const Lin yq = -id0 * dlt - 1.0 * iq;
  MatXd c(2, 8), d(2, 2);
  c.row(0) = yd.x.transpose();
  d.row(0) = yd.u.transpose();
  c.row(1) = yq.x.transpose();
  d.row(1) = yq.u.transpose();
  return RealDescriptor(e, a, b, c, d);
}

RealDescriptor converter_acdc_block(const VscParams& p, const AcOperatingPoint& op,
                                    const DcOperatingPoint& dc) {
  const VscGains g = vsc_gains(p);
  if (op.u_mag <= 0.0 || dc.u_dc <= 0.0)
    throw InvalidOperatingPoint("converter: terminal voltages must be positive");
  const double u0 = op.u_mag, udc0 = dc.u_dc;
  const double id0 = op.p / u0, iq0 = -op.q / u0;
  const double lt = p.lf / kOmegaBase;
  // Steady modulation voltage in the converter frame; the valve scales it
  // with the dc-bus voltage, which couples the dc port into the ac loops.
  const double v0d = u0 + p.rf * id0 - p.lf * iq0;
  const double v0q = p.rf * iq0 + p.lf * id0;

  if (p.mode == VscParams::Mode::DcVoltageControl) {
    // States as the power-controlled converter, with the dc-voltage
    // integrator replacing the active-power integrator.
    LinSpace ls{8, 3};
    const Lin id = ls.state(0), iq = ls.state(1), dlt = ls.state(2), xp = ls.state(3);
    const Lin xcd = ls.state(4), xcq = ls.state(5), xdc = ls.state(6), xoq = ls.state(7);
    const Lin ud = ls.input(0), uq = ls.input(1), udc = ls.input(2);

    const Lin uqm = uq - u0 * dlt;
    const Lin dw = g.kp_pll * uqm + g.ki_pll * xp;
    const Lin qm = id0 * uqm - iq0 * ud - u0 * iq;
    const Lin idref = g.kp_dc * udc + g.ki_dc * xdc;
    const Lin iqref = g.kp_oq * qm - g.ki_oq * xoq;
    const Lin ed = idref - id, eq = iqref - iq;

    MatXd e = MatXd::Identity(8, 8);
    e(0, 0) = lt;
    e(1, 1) = lt;
    MatXd a(8, 8), b(8, 3);
    RowWriter row{a, b};
    row(0, g.kp_c * ed + g.ki_c * xcd - p.rf * id + (lt * iq0) * dw + (v0d / udc0) * udc);
    row(1, g.kp_c * eq + g.ki_c * xcq - p.rf * iq - (lt * id0) * dw + (v0q / udc0) * udc);
    row(2, dw);
    row(3, uqm);
    row(4, ed);
    row(5, eq);
    row(6, udc);
    row(7, -1.0 * qm);

    // Modulation reference; its dc-scaling term cancels against the quadratic
    // term of the dc power balance, leaving the reference alone in the output.
    const Lin vrefd = ud + g.kp_c * ed + g.ki_c * xcd - p.lf * iq;
    const Lin vrefq = uqm + g.kp_c * eq + g.ki_c * xcq + p.lf * id;
    const Lin yd = iq0 * dlt - 1.0 * id;
    const Lin yq = -id0 * dlt - 1.0 * iq;
    const Lin ydc = (1.0 / udc0) * (v0d * id + v0q * iq + id0 * vrefd + iq0 * vrefq);
    MatXd c(3, 8), d(3, 3);
    c.row(0) = yd.x.transpose();
    d.row(0) = yd.u.transpose();
    c.row(1) = yq.x.transpose();
    d.row(1) = yq.u.transpose();
    c.row(2) = ydc.x.transpose();
    d.row(2) = ydc.u.transpose();
    return RealDescriptor(e, a, b, c, d);
  }

  if (p.mode == VscParams::Mode::VoltageFrequencyControl) {
    // Fixed-frequency frame: the converter frame is the area reference, so
    // no angle state appears and the bus angle is zero by construction. The
    // modulation carries no terminal-voltage feed-forward: the converter forms
    // the bus voltage, so feeding it back would turn the voltage source into a
    // current source and leave the bus ill-defined against inductive branches.
    LinSpace ls{6, 3};
    const Lin id = ls.state(0), iq = ls.state(1);
    const Lin xcd = ls.state(2), xcq = ls.state(3), xvd = ls.state(4), xvq = ls.state(5);
    const Lin ud = ls.input(0), uq = ls.input(1), udc = ls.input(2);

    const Lin idref = g.ki_v * xvd - g.kp_v * ud;
    const Lin iqref = g.ki_v * xvq - g.kp_v * uq;
    const Lin ed = idref - id, eq = iqref - iq;

    MatXd e = MatXd::Identity(6, 6);
    e(0, 0) = lt;
    e(1, 1) = lt;
    MatXd a(6, 6), b(6, 3);
    RowWriter row{a, b};
    row(0, g.kp_c * ed + g.ki_c * xcd - p.rf * id - ud + (v0d / udc0) * udc);
    row(1, g.kp_c * eq + g.ki_c * xcq - p.rf * iq - uq + (v0q / udc0) * udc);
    row(2, ed);
    row(3, eq);
    row(4, -1.0 * ud);
    row(5, -1.0 * uq);

    const Lin vrefd = g.kp_c * ed + g.ki_c * xcd - p.lf * iq;
    const Lin vrefq = g.kp_c * eq + g.ki_c * xcq + p.lf * id;
    const Lin yd = -1.0 * id;
    const Lin yq = -1.0 * iq;
    const Lin ydc = (1.0 / udc0) * (v0d * id + v0q * iq + id0 * vrefd + iq0 * vrefq);
    MatXd c(3, 6), d(3, 3);
    c.row(0) = yd.x.transpose();
    d.row(0) = yd.u.transpose();
    c.row(1) = yq.x.transpose();
    d.row(1) = yq.u.transpose();
    c.row(2) = ydc.x.transpose();
    d.row(2) = ydc.u.transpose();
    return RealDescriptor(e, a, b, c, d);
  }

  throw ConfigError("converter_acdc_block: power-controlled converters have no dc port");
}

}  // namespace impnet
