#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "impnet/types.hpp"

namespace impnet {

/// Closed boundary of the right half-plane traversed clockwise: up the
/// imaginary axis from -jR to +jR with right-facing semicircular detours
/// around imaginary-axis modes, closed by the arc through +R. Modes that are
/// detoured around stay outside the enclosed region and therefore must not be
/// counted as right half-plane modes by encirclement arguments.
class NyquistContour {
 public:
  struct Options {
    /// Radius of the closing arc; must dominate every finite mode magnitude.
    double radius = 1e6;
    /// Radius of the semicircular detours around imaginary-axis modes.
    double indent_radius = 0.1 * kOmegaBase * 1e-2;
    /// Scale of the asinh warp that concentrates axis samples at low
    /// frequency while still reaching the closing arc in few steps.
    double omega_scale = kOmegaBase;
    /// Uniform densification factor for every segment's base sample count.
    int refinement = 1;
  };

  /// Build the contour, detouring around the imaginary parts of `axis_modes`
  /// (each already classified as sitting on the axis by the caller).
  static NyquistContour around_rhp(const std::vector<Complex>& axis_modes, Options opt);

  std::size_t size() const { return pts_.size(); }
  Complex at(std::size_t i) const { return pts_[i]; }
  const std::vector<Complex>& points() const { return pts_; }
  const std::vector<double>& indent_centers() const { return centers_; }
  const Options& options() const { return opt_; }

  /// Insert the on-contour midpoint between samples i and i+1 (wrapping at the
  /// end); returns the index of the inserted sample. Throws Error when the gap
  /// cannot be subdivided further.
  std::size_t refine_between(std::size_t i);

 private:
  enum class Kind { Axis, Indent, Closing };
  struct Segment {
    Kind kind;
    double a = 0.0, b = 0.0;  // axis: asinh-warped endpoints; arcs: unused
    double center = 0.0;      // indent: imaginary part of the detoured mode
  };

  Complex map(const Segment& seg, double t) const;

  Options opt_;
  std::vector<Segment> segs_;
  std::vector<std::pair<std::size_t, double>> params_;
  std::vector<Complex> pts_;
  std::vector<double> centers_;
};

}  // namespace impnet
