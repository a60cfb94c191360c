#include "impnet/winding.hpp"

#include <cmath>

#include "impnet/errors.hpp"

namespace impnet {

int clockwise_winding(const std::vector<Complex>& loop) {
  if (loop.size() < 3) throw ContourTooCoarse("winding: need at least three samples", 0);
  double max_abs = 0.0;
  for (const Complex& v : loop) max_abs = std::max(max_abs, std::abs(v));
  if (max_abs == 0.0) throw PointOnLocus("winding: curve is identically zero");
  double total = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Complex a = loop[i];
    const Complex b = loop[(i + 1) % loop.size()];
    if (std::abs(a) < 1e-12 * max_abs || std::abs(b) < 1e-12 * max_abs)
      throw PointOnLocus("winding: curve passes through the origin");
    const double step = std::arg(b / a);
    if (std::abs(step) > 0.5 * kPi)
      throw ContourTooCoarse("winding: argument step exceeds a quarter turn", i);
    total += step;
  }
  // Counterclockwise accumulation is positive, so clockwise count negates it.
  return -static_cast<int>(std::lround(total / (2.0 * kPi)));
}

int winding_with_refinement(NyquistContour& contour,
                            const std::function<Complex(Complex)>& f,
                            std::size_t max_points) {
  std::vector<Complex> values;
  values.reserve(contour.size());
  for (std::size_t i = 0; i < contour.size(); ++i) values.push_back(f(contour.at(i)));
  for (;;) {
    try {
      return clockwise_winding(values);
    } catch (const ContourTooCoarse& coarse) {
      if (values.size() >= max_points)
        throw ContourTooCoarse("winding: refinement budget exhausted", coarse.index);
      const std::size_t inserted = contour.refine_between(coarse.index);
      values.insert(values.begin() + static_cast<std::ptrdiff_t>(inserted),
                    f(contour.at(inserted)));
    }
  }
}

}  // namespace impnet
