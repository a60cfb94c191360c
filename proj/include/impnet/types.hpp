#pragma once

#include <complex>

#include <Eigen/Dense>

namespace impnet {

using Index = Eigen::Index;
using Complex = std::complex<double>;

template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatXd = MatX<double>;
using MatXc = MatX<Complex>;
using VecXd = VecX<double>;
using VecXc = VecX<Complex>;
using Mat2d = Eigen::Matrix2d;
using Mat2c = Eigen::Matrix2cd;
using Vec2d = Eigen::Vector2d;
using Vec2c = Eigen::Vector2cd;

inline constexpr double kPi = 3.14159265358979323846;

/// Default base angular frequency of the per-unit system (rad/s).
inline constexpr double kOmegaBase = 2.0 * kPi * 50.0;

/// Eigenvalues with |Re| below this band (scaled by max(1, |Im|)) are treated
/// as sitting on the imaginary axis rather than decisively left or right.
inline constexpr double kMarginalBand = 1e-6;

inline Complex jomega(double omega) { return Complex(0.0, omega); }

}  // namespace impnet
