#pragma once

#include <functional>
#include <vector>

#include "impnet/contour.hpp"
#include "impnet/types.hpp"

namespace impnet {

/// Net clockwise encirclements of the origin by the closed polyline `loop`.
/// Throws ContourTooCoarse (carrying the sample index) when consecutive points
/// turn by more than a quarter circle, so the argument increment would be
/// ambiguous, and PointOnLocus when a sample sits at the origin relative to
/// the curve's overall magnitude.
int clockwise_winding(const std::vector<Complex>& loop);

/// Clockwise winding of f along the contour, subdividing the contour in place
/// wherever the image turns too sharply. Newly inserted samples are evaluated
/// incrementally. Throws ContourTooCoarse if the budget `max_points` is
/// reached before every step is resolved.
int winding_with_refinement(NyquistContour& contour,
                            const std::function<Complex(Complex)>& f,
                            std::size_t max_points = 200000);

}  // namespace impnet
