#include <doctest.h>

#include <random>

#include <Eigen/Eigenvalues>

#include "impnet/frames.hpp"
#include "test_util.hpp"

using namespace impnet;
using testing::max_abs_diff;
using testing::random_cmatrix;
using testing::random_rotation_symmetric;
using testing::random_system;

namespace {

const Complex kProbes[] = {{0.2, 10.0}, {-0.5, 80.0}, {1.0, -40.0}, {0.0, 314.0}};
const double kAngles[] = {0.0, 0.3, -1.2, 2.7, kPi / 2};

}  // namespace

TEST_CASE("the dq rotation becomes a diagonal phase pair in pn coordinates") {
  for (double th : kAngles) {
    Mat2c got = sym_matrix() * rot_dq(th).cast<Complex>() * sym_matrix_inverse();
    CHECK(max_abs_diff(got, rot_pn(th)) < 1e-14);
  }
  CHECK(max_abs_diff(sym_matrix() * sym_matrix_inverse(), Mat2c::Identity()) < 1e-15);
}

TEST_CASE("domain conversions round-trip to the original block") {
  std::mt19937 rng(11);
  auto g = to_complex(random_system(rng, 3, 2, 2));
  auto back = to_dq(to_pn(g));
  for (Complex s : kProbes) CHECK(max_abs_diff(evaluate(back, s), evaluate(g, s)) < 1e-12);

  auto g3 = to_complex(random_system(rng, 4, 3, 3));
  auto back3 = to_dq_acdc(to_pn_acdc(g3));
  for (Complex s : kProbes) CHECK(max_abs_diff(evaluate(back3, s), evaluate(g3, s)) < 1e-12);
}

TEST_CASE("frame rotations compose and invert") {
  std::mt19937 rng(13);
  auto g = random_system(rng, 3, 2, 2);
  auto twice = rereference(rereference(g, 0.4), 0.9);
  auto direct = rereference(g, 1.3);
  auto back = rereference(rereference(g, 0.7), -0.7);
  for (Complex s : kProbes) {
    CHECK(max_abs_diff(evaluate(twice, s), evaluate(direct, s)) < 1e-12);
    CHECK(max_abs_diff(evaluate(back, s), evaluate(g, s)) < 1e-12);
  }
}

TEST_CASE("rotation commutes with the domain change") {
  std::mt19937 rng(19);
  auto g = to_complex(random_system(rng, 3, 2, 2));
  for (double th : kAngles) {
    auto via_dq = to_pn(rereference(g, th));
    auto via_pn = rereference_pn(to_pn(g), th);
    for (Complex s : kProbes)
      CHECK(max_abs_diff(evaluate(via_dq, s), evaluate(via_pn, s)) < 1e-11);
  }
}

TEST_CASE("rotation-symmetric blocks are invariant under rereferencing") {
  std::mt19937 rng(29);
  for (int trial = 0; trial < 5; ++trial) {
    auto g = random_rotation_symmetric(rng, 2);
    CHECK(is_dq_symmetric(g));
    for (double th : kAngles) {
      auto rot = rereference(g, th);
      for (Complex s : kProbes)
        CHECK(max_abs_diff(evaluate(rot, s), evaluate(g, s)) < 1e-11);
    }
  }
  std::mt19937 rng2(31);
  CHECK(!is_dq_symmetric(random_system(rng2, 3, 2, 2)));
}

TEST_CASE("in pn coordinates a rotation only phases the off-diagonal entries") {
  std::mt19937 rng(37);
  auto g = to_pn(to_complex(random_system(rng, 3, 2, 2)));
  for (double th : kAngles) {
    auto rot = rereference_pn(g, th);
    for (Complex s : kProbes) {
      MatXc h0 = evaluate(g, s), h1 = evaluate(rot, s);
      CHECK(std::abs(h1(0, 0) - h0(0, 0)) < 1e-11);
      CHECK(std::abs(h1(1, 1) - h0(1, 1)) < 1e-11);
      CHECK(std::abs(h1(0, 1) - h0(0, 1) * std::exp(Complex(0, 2.0 * th))) < 1e-11);
      CHECK(std::abs(h1(1, 0) - h0(1, 0) * std::exp(Complex(0, -2.0 * th))) < 1e-11);
    }
  }
}

TEST_CASE("eigenvalue pairs match a general solver") {
  std::mt19937 rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    Mat2c m = random_cmatrix(rng, 2, 2);
    auto [a, b] = eigen_pair(m);
    Eigen::ComplexEigenSolver<Mat2c> es(m, false);
    const Complex e0 = es.eigenvalues()(0), e1 = es.eigenvalues()(1);
    const bool direct = std::abs(a - e0) < 1e-12 && std::abs(b - e1) < 1e-12;
    const bool swapped = std::abs(a - e1) < 1e-12 && std::abs(b - e0) < 1e-12;
    CHECK((direct || swapped));
  }
}

TEST_CASE("eigen loci are invariant under rereferencing") {
  std::mt19937 rng(47);
  auto g = to_complex(random_system(rng, 4, 2, 2));
  auto rot = rereference(g, 1.1);
  std::vector<Mat2c> v0, v1;
  for (int k = 1; k <= 30; ++k) {
    const Complex s(0.0, 2.0 * kPi * 2.0 * k);
    v0.push_back(evaluate(g, s));
    v1.push_back(evaluate(rot, s));
  }
  auto l0 = eigen_loci(v0), l1 = eigen_loci(v1);
  for (std::size_t k = 0; k < v0.size(); ++k) {
    const bool direct = std::abs(l0[0][k] - l1[0][k]) < 1e-10 &&
                        std::abs(l0[1][k] - l1[1][k]) < 1e-10;
    const bool swapped = std::abs(l0[0][k] - l1[1][k]) < 1e-10 &&
                         std::abs(l0[1][k] - l1[0][k]) < 1e-10;
    CHECK((direct || swapped));
  }
}

TEST_CASE("loci tracking survives a branch-cut crossing without swapping") {
  // Eigenvalues are exactly +e^{jt} and -e^{jt}; the quadratic's square root
  // flips branch mid-sweep, so only displacement pairing keeps each track
  // continuous from 1 to -1 and from -1 to 1.
  std::vector<Mat2c> seq;
  const int n = 101;
  for (int k = 0; k < n; ++k) {
    const double t = kPi * k / (n - 1);
    Mat2c m = Mat2c::Zero();
    m(0, 0) = std::exp(Complex(0, t));
    m(1, 1) = -std::exp(Complex(0, t));
    // Rotate the basis so the matrix is not diagonal.
    Mat2c q;
    q << Complex(0.8, 0.1), Complex(-0.3, 0.4), Complex(0.3, 0.4), Complex(0.8, -0.1);
    seq.push_back(q * m * q.inverse());
  }
  auto loci = eigen_loci(seq);
  for (int k = 0; k + 1 < n; ++k) {
    CHECK(std::abs(loci[0][k + 1] - loci[0][k]) < 0.1);
    CHECK(std::abs(loci[1][k + 1] - loci[1][k]) < 0.1);
  }
  CHECK(std::abs(loci[0][0] + loci[0][n - 1]) < 1e-9);
  CHECK(std::abs(loci[1][0] + loci[1][n - 1]) < 1e-9);
}
