#pragma once

#include <vector>

#include "impnet/types.hpp"

namespace impnet {

/// Uniform frequency sweep in hertz, endpoints inclusive.
struct FrequencyGrid {
  double f_min = 2.0;
  double f_max = 100.0;
  double f_step = 2.0;

  static FrequencyGrid standard() { return {}; }

  std::vector<double> hertz() const {
    std::vector<double> f;
    if (f_step <= 0.0 || f_max < f_min) return f;
    for (double x = f_min; x <= f_max + 0.5 * f_step; x += f_step) f.push_back(x);
    if (!f.empty() && f.back() > f_max) f.back() = f_max;
    return f;
  }

  std::vector<double> radians() const {
    std::vector<double> w = hertz();
    for (double& x : w) x *= 2.0 * kPi;
    return w;
  }
};

}  // namespace impnet
