#include <cmath>
#include <random>

#include "doctest.h"
#include "impnet/descriptor.hpp"
#include "impnet/errors.hpp"
#include "impnet/frames.hpp"
#include "impnet/powerflow.hpp"
#include "test_util.hpp"

using namespace impnet;
using namespace impnet::powerflow;

TEST_CASE("two-bus transfer matches the closed-form angle relation") {
  const double x = 0.5;
  // choose the exact solution first, then recover it from a flat start
  const Complex v_target = std::polar(1.0, -0.25);
  PowerflowSpec spec = PowerflowSpec::empty(2);
  add_branch(spec, 0, 1, {0.0, x});
  VecXc v_exact(2);
  v_exact << Complex(1.0, 0.0), v_target;
  const VecXc s_exact = v_exact.array() * (spec.ybus * v_exact).conjugate().array();
  spec.injections(1) = s_exact(1);

  // lossless line: injected power obeys p = sin(angle difference) / x
  CHECK(s_exact(1).real() == doctest::Approx(std::sin(-0.25) / x).epsilon(1e-12));

  const PowerflowSolution sol = solve_powerflow(spec);
  CHECK(std::abs(sol.v(1) - v_target) < 1e-12);
  CHECK(std::abs(sol.v(0) - Complex(1.0, 0.0)) < 1e-15);
  CHECK(sol.slack_injection.real() + s_exact(1).real() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("random networks recover a constructed voltage profile") {
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> ur(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 3 + static_cast<Index>(rng() % 5);
    PowerflowSpec spec = PowerflowSpec::empty(n);
    for (Index k = 1; k < n; ++k)
      add_branch(spec, k - 1, k, {0.005 + 0.045 * ur(rng), 0.1 + 0.2 * ur(rng)});
    if (n > 3) add_branch(spec, 0, n - 1, {0.01, 0.2});
    add_shunt(spec, n - 1, Complex(0.0, 0.05 + 0.15 * ur(rng)));

    // keep transfers within the flat-start basin so the constructed profile is
    // the solution the solver should land on
    VecXc v_target(n);
    for (Index k = 0; k < n; ++k)
      v_target(k) = std::polar(0.97 + 0.06 * ur(rng), -0.08 + 0.16 * ur(rng));
    v_target(0) = std::abs(v_target(0));  // fixed bus sits at angle zero
    spec.slack_mag = v_target(0).real();
    const VecXc s_exact = v_target.array() * (spec.ybus * v_target).conjugate().array();
    for (Index k = 1; k < n; ++k) spec.injections(k) = s_exact(k);

    const PowerflowSolution sol = solve_powerflow(spec);
    CHECK((sol.v - v_target).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(sol.iterations < 15);
    CHECK(std::abs(sol.slack_injection - s_exact(0)) < 1e-10);
  }
}

TEST_CASE("zero-injection buses stay balanced") {
  PowerflowSpec spec = PowerflowSpec::empty(3);
  add_branch(spec, 0, 1, {0.01, 0.1});
  add_branch(spec, 1, 2, {0.02, 0.15});
  spec.injections(2) = Complex(-0.6, -0.1);  // load at the far end, tie bus in between
  const PowerflowSolution sol = solve_powerflow(spec);
  const VecXc s = sol.v.array() * (spec.ybus * sol.v).conjugate().array();
  CHECK(std::abs(s(1)) < 1e-12);
  CHECK(std::abs(s(2) - spec.injections(2)) < 1e-12);
  // the tie bus passes the branch current straight through
  const Complex i01 = (sol.v(0) - sol.v(1)) / Complex(0.01, 0.1);
  const Complex i12 = (sol.v(1) - sol.v(2)) / Complex(0.02, 0.15);
  CHECK(std::abs(i01 - i12) < 1e-12);
}

TEST_CASE("operating point maps the solved phasor onto device conventions") {
  const Complex v = std::polar(0.98, 0.4);
  const Complex s(0.7, -0.2);
  const AcOperatingPoint op = device_operating_point(v, s);
  CHECK(op.u_mag == doctest::Approx(0.98).epsilon(1e-14));
  CHECK(op.theta == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(op.p == doctest::Approx(0.7).epsilon(1e-14));
  CHECK(op.q == doctest::Approx(-0.2).epsilon(1e-14));
}

TEST_CASE("dc port power accounts for the filter loss") {
  const Complex v = std::polar(1.01, 0.1);
  const Complex s(-0.9, 0.1);
  const double want = -0.9 + 0.005 * std::norm(s) / (1.01 * 1.01);
  CHECK(dc_port_power(s, v, 0.005) == doctest::Approx(want).epsilon(1e-14));
  // a converter injecting power draws it from the dc side, plus the loss
  CHECK(dc_port_power(Complex(0.5, 0.0), Complex(1.0, 0.0), 0.01) ==
        doctest::Approx(0.5 + 0.01 * 0.25).epsilon(1e-14));
}

TEST_CASE("transfers beyond the static limit report no convergence") {
  PowerflowSpec spec = PowerflowSpec::empty(2);
  add_branch(spec, 0, 1, {0.0, 0.5});
  spec.injections(1) = Complex(3.0, 0.0);  // p*x = 1.5 exceeds the line capability
  CHECK_THROWS_AS(solve_powerflow(spec), NoConvergence);
}

TEST_CASE("phasor branch admittance agrees with the dynamic model") {
  const BranchParams p{0.02, 0.18};
  // positive-sequence entry of the rotating-frame block at the base frequency
  const ComplexDescriptor pn = to_pn(to_complex(branch_shunt_admittance(p)));
  const MatXc h = evaluate(pn, Complex(0.0, 0.0));
  const Complex y_phasor = 1.0 / Complex(p.r, p.x);
  CHECK(std::abs(h(0, 0) - y_phasor) < 1e-12);
  CHECK(std::abs(h(1, 1) - std::conj(y_phasor)) < 1e-12);
  CHECK(std::abs(h(0, 1)) < 1e-14);
}
