#include "impnet/contour.hpp"

#include <algorithm>
#include <cmath>

#include "impnet/errors.hpp"

namespace impnet {

Complex NyquistContour::map(const Segment& seg, double t) const {
  switch (seg.kind) {
    case Kind::Axis:
      return Complex(0.0, opt_.omega_scale * std::sinh(seg.a + t * (seg.b - seg.a)));
    case Kind::Indent:
      return Complex(0.0, seg.center) +
             opt_.indent_radius * std::exp(Complex(0.0, -0.5 * kPi + t * kPi));
    case Kind::Closing:
    default:
      return opt_.radius * std::exp(Complex(0.0, 0.5 * kPi - t * kPi));
  }
}

NyquistContour NyquistContour::around_rhp(const std::vector<Complex>& axis_modes,
                                          Options opt) {
  NyquistContour c;
  c.opt_ = opt;
  const double r = opt.indent_radius;

  // Cluster detour centers so overlapping semicircles collapse into one.
  std::vector<double> centers;
  for (const Complex& m : axis_modes)
    if (std::abs(m.imag()) < 0.9 * opt.radius) centers.push_back(m.imag());
  std::sort(centers.begin(), centers.end());
  std::vector<double> merged;
  for (double x : centers) {
    if (!merged.empty() && x - merged.back() < 2.5 * r)
      merged.back() = 0.5 * (merged.back() + x);
    else
      merged.push_back(x);
  }
  c.centers_ = merged;

  const auto warp = [&](double omega) { return std::asinh(omega / opt.omega_scale); };
  double cursor = -opt.radius;
  for (double center : merged) {
    const double lo = center - r, hi = center + r;
    if (lo > cursor)
      c.segs_.push_back({Kind::Axis, warp(cursor), warp(lo), 0.0});
    c.segs_.push_back({Kind::Indent, 0.0, 0.0, center});
    cursor = std::max(cursor, hi);
  }
  if (cursor < opt.radius)
    c.segs_.push_back({Kind::Axis, warp(cursor), warp(opt.radius), 0.0});
  c.segs_.push_back({Kind::Closing, 0.0, 0.0, 0.0});

  // Sample each segment over [0, 1), so segment joins are not duplicated and
  // the final sample wraps around to the first.
  for (std::size_t si = 0; si < c.segs_.size(); ++si) {
    const Segment& seg = c.segs_[si];
    int count = 0;
    switch (seg.kind) {
      case Kind::Axis:
        count = std::max(8, static_cast<int>(std::ceil(24.0 * std::abs(seg.b - seg.a))));
        break;
      case Kind::Indent:
        count = 32;
        break;
      case Kind::Closing:
        count = 64;
        break;
    }
    count *= std::max(1, opt.refinement);
    for (int i = 0; i < count; ++i) {
      const double t = static_cast<double>(i) / count;
      c.params_.emplace_back(si, t);
      c.pts_.push_back(c.map(seg, t));
    }
  }
  return c;
}

std::size_t NyquistContour::refine_between(std::size_t i) {
  if (pts_.empty()) throw Error("refine_between: empty contour");
  const std::size_t j = (i + 1) % pts_.size();
  const auto [sa, ta] = params_[i];
  const auto [sb, tb] = params_[j];
  std::size_t seg;
  double t;
  if (sa == sb) {
    seg = sa;
    t = 0.5 * (ta + tb);
    if (std::abs(tb - ta) < 1e-14) throw Error("refine_between: gap cannot be subdivided");
  } else {
    // The gap spans a segment join: subdivide the tail of the first segment,
    // falling back to the head of the next when the tail is exhausted.
    seg = sa;
    t = 0.5 * (ta + 1.0);
    if (1.0 - ta < 1e-14) {
      seg = sb;
      t = 0.5 * tb;
      if (tb < 1e-14) throw Error("refine_between: gap cannot be subdivided");
    }
  }
  params_.insert(params_.begin() + static_cast<std::ptrdiff_t>(j), {seg, t});
  pts_.insert(pts_.begin() + static_cast<std::ptrdiff_t>(j), map(segs_[seg], t));
  return j;
}

}  // namespace impnet
