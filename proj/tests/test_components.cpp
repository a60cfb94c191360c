#include <cmath>
#include <vector>

#include "doctest.h"
#include "impnet/components.hpp"
#include "impnet/errors.hpp"
#include "impnet/frames.hpp"
#include "impnet/oracle.hpp"
#include "impnet/pencil.hpp"
#include "test_util.hpp"

using namespace impnet;
using impnet::testing::max_abs_diff;
using Mode = VscParams::Mode;

namespace {

MatXc branch_z(const BranchParams& p, Complex s) {
  MatXc z(2, 2);
  z << p.r + s * p.x / kOmegaBase, -p.x, p.x, p.r + s * p.x / kOmegaBase;
  return z;
}

// Largest entry error across all five matrices of two descriptor realizations.
double realization_diff(const RealDescriptor& a, const RealDescriptor& b) {
  double d = max_abs_diff(a.E, b.E);
  d = std::max(d, max_abs_diff(a.A, b.A));
  d = std::max(d, max_abs_diff(a.B, b.B));
  d = std::max(d, max_abs_diff(a.C, b.C));
  return std::max(d, max_abs_diff(a.D, b.D));
}

}  // namespace

TEST_CASE("converter gains follow the bandwidth design rules") {
  VscParams p;
  p.mode = Mode::PowerControl;
  p.cc_hz = 300.0;
  p.pll_hz = 20.0;
  p.outer_hz = 20.0;
  p.lf = 0.15;
  p.rf = 0.005;
  const VscGains g = vsc_gains(p);
  CHECK(g.kp_c == doctest::Approx(0.9).epsilon(1e-13));
  CHECK(g.ki_c == doctest::Approx(3.0 * kPi).epsilon(1e-13));
  CHECK(g.kp_pll == doctest::Approx(std::sqrt(2.0) * 40.0 * kPi).epsilon(1e-13));
  CHECK(g.ki_pll == doctest::Approx(1600.0 * kPi * kPi).epsilon(1e-13));
  CHECK(g.ki_od == doctest::Approx(40.0 * kPi).epsilon(1e-13));
  CHECK(g.kp_od == doctest::Approx(1.0 / 15.0).epsilon(1e-13));
  // q-axis loop falls back to the active-power bandwidth when not set
  CHECK(g.ki_oq == doctest::Approx(g.ki_od).epsilon(1e-13));
  CHECK(g.kp_oq == doctest::Approx(g.kp_od).epsilon(1e-13));

  p.q_hz = 35.0;
  const VscGains gq = vsc_gains(p);
  CHECK(gq.ki_oq == doctest::Approx(70.0 * kPi).epsilon(1e-13));
  CHECK(gq.kp_oq == doctest::Approx(7.0 / 60.0).epsilon(1e-13));

  VscParams pdc = p;
  pdc.mode = Mode::DcVoltageControl;
  pdc.link_c = 0.3;
  const VscGains gd = vsc_gains(pdc);
  const double ctil = 0.3 / kOmegaBase;
  const double wdc = 2.0 * kPi * 20.0;
  CHECK(gd.kp_dc == doctest::Approx(std::sqrt(2.0) * wdc * ctil).epsilon(1e-13));
  CHECK(gd.ki_dc == doctest::Approx(wdc * wdc * ctil).epsilon(1e-13));

  VscParams pvf = p;
  pvf.mode = Mode::VoltageFrequencyControl;
  const VscGains gv = vsc_gains(pvf);
  CHECK(gv.ki_v == doctest::Approx(40.0 * kPi).epsilon(1e-13));
  CHECK(gv.kp_v == doctest::Approx(1.0 / 15.0).epsilon(1e-13));
}

TEST_CASE("series branch matches its phasor impedance") {
  const BranchParams p{0.01, 0.1};
  const RealDescriptor g = branch_two_port(p);
  const Complex s = jomega(2.0 * kPi * 13.0);
  const MatXc zinv = branch_z(p, s).inverse();
  const MatXc h = evaluate(to_complex(g), s);
  MatXc want(4, 4);
  want << zinv, -zinv, -zinv, zinv;
  CHECK(max_abs_diff(h, want) < 1e-12);

  const MatXc y = evaluate(to_complex(branch_shunt_admittance(p)), s);
  CHECK(max_abs_diff(y, zinv) < 1e-12);

  const MatXc z = evaluate(to_complex(branch_series_impedance(p)), s);
  CHECK(max_abs_diff(z, branch_z(p, s)) < 1e-12);
  // the impedance form is the exact inverse of the admittance form
  CHECK(max_abs_diff(MatXc(z * y), MatXc(MatXc::Identity(2, 2))) < 1e-12);
}

TEST_CASE("shunt capacitor and differentiator match their phasor forms") {
  const double c = 0.2;
  for (const Complex s : {jomega(2.0 * kPi * 7.0), Complex(2.0, 3.0)}) {
    MatXc want(2, 2);
    want << s * c / kOmegaBase, -c, c, s * c / kOmegaBase;
    CHECK(max_abs_diff(evaluate(to_complex(shunt_cap_admittance(c)), s), want) < 1e-12);
    const MatXc hd = evaluate(to_complex(differentiator(0.7)), s);
    REQUIRE(hd.rows() == 1);
    REQUIRE(hd.cols() == 1);
    CHECK(std::abs(hd(0, 0) - 0.7 * s) < 1e-12);
  }
}

TEST_CASE("power-controlled converter linearization matches the nonlinear model") {
  VscParams p;
  p.mode = Mode::PowerControl;
  p.cc_hz = 300.0;
  p.pll_hz = 20.0;
  p.outer_hz = 20.0;
  p.q_hz = 30.0;
  p.lf = 0.15;
  p.rf = 0.005;
  const AcOperatingPoint op{1.03, 0.7, 0.9, -0.35};
  const oracle::VscDeviceModel m{p, op, {}};

  CHECK(m.steady_residual().lpNorm<Eigen::Infinity>() < 1e-12);

  const RealDescriptor lin = m.linearize();
  const RealDescriptor comp = rereference(vsc_admittance(p, op), op.theta);
  CHECK(realization_diff(lin, comp) < 1e-12);

  // independent finite-difference check on the state Jacobian
  const VecXd x0 = m.steady();
  const VecXd u0 = m.steady_inputs();
  const MatXd a_fd = oracle::central_diff_jacobian(
      [&](const VecXd& z) { return m.rhs(z, u0); }, x0, m.states());
  CHECK(max_abs_diff(a_fd, lin.A) < 1e-5 * std::max(1.0, lin.A.cwiseAbs().maxCoeff()));
  const MatXd d_fd = oracle::central_diff_jacobian(
      [&](const VecXd& z) { return m.out(x0, z); }, u0, m.ports());
  CHECK(max_abs_diff(d_fd, lin.D) < 1e-6);
}

TEST_CASE("dc-voltage converter linearization matches the nonlinear model") {
  VscParams p;
  p.mode = Mode::DcVoltageControl;
  p.cc_hz = 300.0;
  p.pll_hz = 10.0;
  p.outer_hz = 50.0;
  p.q_hz = 10.0;
  p.lf = 0.15;
  p.rf = 0.005;
  p.link_c = 0.35;
  const AcOperatingPoint op{0.97, -0.4, -0.8, 0.2};
  const DcOperatingPoint dcop{1.05};
  const oracle::VscDeviceModel m{p, op, dcop};

  CHECK(m.steady_residual().lpNorm<Eigen::Infinity>() < 1e-12);

  const RealDescriptor lin = m.linearize();
  const RealDescriptor comp = rereference_acdc(converter_acdc_block(p, op, dcop), op.theta);
  CHECK(realization_diff(lin, comp) < 1e-12);

  const VecXd x0 = m.steady();
  const VecXd u0 = m.steady_inputs();
  const MatXd b_fd = oracle::central_diff_jacobian(
      [&](const VecXd& z) { return m.rhs(x0, z); }, u0, m.states());
  CHECK(max_abs_diff(b_fd, lin.B) < 1e-5 * std::max(1.0, lin.B.cwiseAbs().maxCoeff()));
}

TEST_CASE("grid-forming converter linearization matches the nonlinear model") {
  VscParams p;
  p.mode = Mode::VoltageFrequencyControl;
  p.cc_hz = 300.0;
  p.outer_hz = 20.0;
  p.lf = 0.15;
  p.rf = 0.005;
  const AcOperatingPoint op{1.0, 0.0, 0.85, -0.15};
  const DcOperatingPoint dcop{1.02};
  const oracle::VscDeviceModel m{p, op, dcop};

  CHECK(m.steady_residual().lpNorm<Eigen::Infinity>() < 1e-12);

  const RealDescriptor lin = m.linearize();
  const RealDescriptor comp = rereference_acdc(converter_acdc_block(p, op, dcop), 0.0);
  CHECK(realization_diff(lin, comp) < 1e-12);

  // the grid-forming block defines the frame, so its angle is pinned to zero
  AcOperatingPoint tilted = op;
  tilted.theta = 0.3;
  CHECK_THROWS_AS((oracle::VscDeviceModel{p, tilted, dcop}.steady()), InvalidOperatingPoint);
}

TEST_CASE("converter pole structure separates control modes") {
  VscParams p;
  p.mode = Mode::PowerControl;
  p.cc_hz = 300.0;
  p.pll_hz = 20.0;
  p.outer_hz = 20.0;
  p.lf = 0.15;
  p.rf = 0.005;
  const AcOperatingPoint op{1.0, 0.0, 0.9, -0.2};

  const std::vector<Complex> pq = poles(vsc_admittance(p, op));
  REQUIRE(pq.size() == 8);
  for (const Complex& z : pq) CHECK(z.real() < -1e-8);

  VscParams pdc = p;
  pdc.mode = Mode::DcVoltageControl;
  pdc.link_c = 0.35;
  const std::vector<Complex> dcv = poles(converter_acdc_block(pdc, op, {1.0}));
  REQUIRE(dcv.size() == 8);
  Index at_origin = 0;
  for (const Complex& z : dcv) {
    if (std::abs(z) < 1e-6)
      ++at_origin;
    else
      CHECK(z.real() < -1e-8);
  }
  // the dc-voltage integrator is driven purely by the dc-port input
  CHECK(at_origin == 1);

  VscParams pvf = p;
  pvf.mode = Mode::VoltageFrequencyControl;
  const std::vector<Complex> vf = poles(converter_acdc_block(pvf, op, {1.0}));
  REQUIRE(vf.size() == 6);
  at_origin = 0;
  for (const Complex& z : vf) {
    if (std::abs(z) < 1e-6)
      ++at_origin;
    else
      CHECK(z.real() < -1e-8);
  }
  // both voltage-loop integrators are driven purely by the bus-voltage input
  CHECK(at_origin == 2);
}

TEST_CASE("configuration validation rejects bad converter parameters") {
  VscParams good;
  good.mode = Mode::PowerControl;
  const AcOperatingPoint op{1.0, 0.0, 0.5, 0.0};

  VscParams p = good;
  p.lf = 0.0;
  CHECK_THROWS_AS(vsc_gains(p), ConfigError);
  p = good;
  p.rf = 1e-5;
  CHECK_THROWS_AS(vsc_gains(p), ConfigError);
  p = good;
  p.pll_hz = 0.0;
  CHECK_THROWS_AS(vsc_gains(p), ConfigError);
  p = good;
  p.mode = Mode::DcVoltageControl;
  p.link_c = 0.0;
  CHECK_THROWS_AS(vsc_gains(p), ConfigError);

  p = good;
  p.mode = Mode::DcVoltageControl;
  p.link_c = 0.3;
  CHECK_THROWS_AS(vsc_admittance(p, op), ConfigError);
  CHECK_THROWS_AS(converter_acdc_block(good, op, {1.0}), ConfigError);

  CHECK_THROWS_AS(branch_two_port({0.0, 0.0}), ConfigError);
  CHECK_THROWS_AS(shunt_cap_admittance(0.0), ConfigError);
  CHECK_THROWS_AS(vsc_admittance(good, {0.0, 0.0, 0.5, 0.0}), InvalidOperatingPoint);
}
