#include <doctest.h>

#include <random>

#include "impnet/descriptor.hpp"
#include "impnet/errors.hpp"
#include "test_util.hpp"

using namespace impnet;
using testing::max_abs_diff;
using testing::random_matrix;
using testing::random_system;

namespace {

const Complex kProbes[] = {{0.3, 2.1}, {-1.7, 0.4}, {0.0, 5.0}, {2.2, -3.3}};

}  // namespace

TEST_CASE("static gain evaluates to D at any frequency") {
  MatXd d(2, 2);
  d << 1.0, 2.0, 3.0, 4.0;
  auto g = RealDescriptor::gain(d);
  CHECK(g.states() == 0);
  for (Complex s : kProbes) CHECK(max_abs_diff(evaluate(g, s), d.cast<Complex>()) == 0.0);
  auto id = RealDescriptor::identity(3);
  CHECK(max_abs_diff(evaluate(id, kProbes[0]), MatXc::Identity(3, 3)) == 0.0);
}

TEST_CASE("series resistor-capacitor impedance matches closed form") {
  const double res = 2.0, cap = 0.5;
  MatXd e(1, 1), a(1, 1), b(1, 1), c(1, 1), d(1, 1);
  e << cap;
  a << 0.0;
  b << 1.0;
  c << 1.0;
  d << res;
  RealDescriptor z(e, a, b, c, d);
  for (Complex s : kProbes) {
    Complex want = res + 1.0 / (s * cap);
    CHECK(std::abs(evaluate(z, s)(0, 0) - want) < 1e-12);
  }
}

TEST_CASE("add and multiply agree with pointwise matrix algebra") {
  std::mt19937 rng(91);
  for (int trial = 0; trial < 5; ++trial) {
    auto g1 = random_system(rng, 3, 2, 2);
    auto g2 = random_system(rng, 4, 2, 2);
    auto sum = add(g1, g2);
    auto prod = multiply(g1, g2);
    for (Complex s : kProbes) {
      MatXc v1 = evaluate(g1, s), v2 = evaluate(g2, s);
      CHECK(max_abs_diff(evaluate(sum, s), v1 + v2) < 1e-10);
      CHECK(max_abs_diff(evaluate(prod, s), v1 * v2) < 1e-10);
    }
  }
}

TEST_CASE("invert reproduces the pointwise matrix inverse even with singular D") {
  std::mt19937 rng(17);
  auto g = random_system(rng, 3, 2, 2);
  g.D.setZero();  // strictly proper, so the inverse is improper
  auto gi = invert(g);
  for (Complex s : kProbes)
    CHECK(max_abs_diff(evaluate(gi, s), evaluate(g, s).inverse()) < 1e-9);
}

TEST_CASE("inverting an integrator yields a differentiator") {
  MatXd e(1, 1), a(1, 1), b(1, 1), c(1, 1), d(1, 1);
  e << 1.0;
  a << 0.0;
  b << 1.0;
  c << 1.0;
  d << 0.0;
  RealDescriptor integrator(e, a, b, c, d);
  auto diff = invert(integrator);
  for (Complex s : kProbes) CHECK(std::abs(evaluate(diff, s)(0, 0) - s) < 1e-12);
}

TEST_CASE("parallel and feedback match their defining formulas") {
  std::mt19937 rng(23);
  auto g1 = random_system(rng, 3, 2, 2);
  auto g2 = random_system(rng, 2, 2, 2);
  auto par = parallel(g1, g2);
  auto fb = feedback(g1, g2);
  for (Complex s : kProbes) {
    MatXc v1 = evaluate(g1, s), v2 = evaluate(g2, s);
    MatXc want_par = (v1.inverse() + v2.inverse()).inverse();
    MatXc want_fb = (MatXc::Identity(2, 2) + v1 * v2).inverse() * v1;
    CHECK(max_abs_diff(evaluate(par, s), want_par) < 1e-9);
    CHECK(max_abs_diff(evaluate(fb, s), want_fb) < 1e-9);
  }
}

TEST_CASE("scale, block_diag, subsystem and port transforms") {
  std::mt19937 rng(41);
  auto g1 = random_system(rng, 3, 2, 2);
  auto g2 = random_system(rng, 2, 1, 3);
  for (Complex s : kProbes) {
    MatXc v1 = evaluate(g1, s), v2 = evaluate(g2, s);

    CHECK(max_abs_diff(evaluate(scale(g1, -2.5), s), -2.5 * v1) < 1e-11);

    auto bd = block_diag(g1, g2);
    CHECK(bd.inputs() == 5);
    CHECK(bd.outputs() == 3);
    MatXc vbd = evaluate(bd, s);
    CHECK(max_abs_diff(vbd.topLeftCorner(2, 2), v1) < 1e-11);
    CHECK(max_abs_diff(vbd.bottomRightCorner(1, 3), v2) < 1e-11);
    CHECK(vbd.topRightCorner(2, 3).cwiseAbs().maxCoeff() == 0.0);

    auto sub = subsystem(g1, {1}, {0, 1});
    MatXc vs = evaluate(sub, s);
    CHECK(std::abs(vs(0, 0) - v1(1, 0)) < 1e-12);
    CHECK(std::abs(vs(0, 1) - v1(1, 1)) < 1e-12);

    MatXd t = random_matrix(rng, 2, 2);
    CHECK(max_abs_diff(evaluate(transform_outputs(g1, t), s), t.cast<Complex>() * v1) < 1e-11);
    CHECK(max_abs_diff(evaluate(transform_inputs(g1, t), s), v1 * t.cast<Complex>()) < 1e-11);
  }
}

TEST_CASE("eliminating ports performs an exact Schur complement") {
  std::mt19937 rng(57);
  for (int trial = 0; trial < 4; ++trial) {
    auto g = random_system(rng, 4, 3, 3);
    auto red = eliminate_ports(g, {1});
    CHECK(red.inputs() == 2);
    CHECK(red.outputs() == 2);
    for (Complex s : kProbes) {
      MatXc v = evaluate(g, s);
      std::vector<Index> keep = {0, 2};
      MatXc vkk(2, 2), vke(2, 1), vek(1, 2), vee(1, 1);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) vkk(i, j) = v(keep[i], keep[j]);
      for (int i = 0; i < 2; ++i) vke(i, 0) = v(keep[i], 1);
      for (int j = 0; j < 2; ++j) vek(0, j) = v(1, keep[j]);
      vee(0, 0) = v(1, 1);
      MatXc want = vkk - vke * vee.inverse() * vek;
      CHECK(max_abs_diff(evaluate(red, s), want) < 1e-9);
    }
  }
}

TEST_CASE("eliminating every port in stages matches one-shot elimination") {
  std::mt19937 rng(63);
  auto g = random_system(rng, 3, 3, 3);
  auto once = eliminate_ports(g, {0, 2});
  auto staged = eliminate_ports(eliminate_ports(g, {2}), {0});
  for (Complex s : kProbes)
    CHECK(max_abs_diff(evaluate(once, s), evaluate(staged, s)) < 1e-9);
}

TEST_CASE("dimension errors are rejected") {
  std::mt19937 rng(5);
  auto g22 = random_system(rng, 2, 2, 2);
  auto g12 = random_system(rng, 2, 1, 2);
  CHECK_THROWS_AS(add(g22, g12), DimensionMismatch);
  CHECK_THROWS_AS(multiply(g12, g12), DimensionMismatch);
  CHECK_THROWS_AS(invert(g12), NonSquareSystem);
  CHECK_THROWS_AS(subsystem(g22, {2}, {0}), DimensionMismatch);
  CHECK_THROWS_AS(eliminate_ports(g22, {3}), DimensionMismatch);
  CHECK_THROWS_AS(RealDescriptor(MatXd::Zero(2, 2), MatXd::Zero(3, 3), MatXd::Zero(3, 1),
                                 MatXd::Zero(1, 3), MatXd::Zero(1, 1)),
                  DimensionMismatch);
}

TEST_CASE("evaluating at a pole reports the singular frequency") {
  MatXd e(1, 1), a(1, 1), b(1, 1), c(1, 1), d(1, 1);
  e << 1.0;
  a << -2.0;
  b << 1.0;
  c << 1.0;
  d << 0.0;
  RealDescriptor g(e, a, b, c, d);
  CHECK_THROWS_AS(evaluate(g, Complex(-2.0, 0.0)), SingularAtFrequency);
}
