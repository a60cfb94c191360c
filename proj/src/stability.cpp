#include "impnet/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <Eigen/Eigenvalues>

#include "impnet/contour.hpp"
#include "impnet/errors.hpp"
#include "impnet/pencil.hpp"
#include "impnet/winding.hpp"

namespace impnet {
namespace {

// The closing arc must dominate every finite loop-operator mode.
constexpr double kRadiusFactor = 1e3;

double mode_scale(const std::vector<Complex>& modes) {
  double s = 1.0;
  for (const Complex& m : modes) s = std::max(s, std::abs(m));
  return s;
}

// Rightmost first; ties broken on the imaginary part so runs are repeatable.
void sort_modes(std::vector<Complex>& modes) {
  std::sort(modes.begin(), modes.end(), [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
}

// Continue eigenvalue tracks across samples by repeatedly taking the closest
// unassigned (track, candidate) pair. The first sample is ordered
// lexicographically so runs are repeatable.
std::vector<std::vector<Complex>> pair_tracks(
    const std::vector<std::vector<Complex>>& per_sample) {
  if (per_sample.empty()) return {};
  const std::size_t m = per_sample.front().size();
  std::vector<Complex> prev = per_sample.front();
  std::sort(prev.begin(), prev.end(), [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  std::vector<std::vector<Complex>> tracks(m);
  for (std::size_t i = 0; i < m; ++i) tracks[i].push_back(prev[i]);
  for (std::size_t k = 1; k < per_sample.size(); ++k) {
    const std::vector<Complex>& cur = per_sample[k];
    std::vector<bool> track_used(m, false), cand_used(m, false);
    std::vector<Complex> next(m);
    for (std::size_t pick = 0; pick < m; ++pick) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t bi = 0, bj = 0;
      for (std::size_t i = 0; i < m; ++i) {
        if (track_used[i]) continue;
        for (std::size_t j = 0; j < m; ++j) {
          if (cand_used[j]) continue;
          const double d = std::abs(prev[i] - cur[j]);
          if (d < best) {
            best = d;
            bi = i;
            bj = j;
          }
        }
      }
      track_used[bi] = true;
      cand_used[bj] = true;
      next[bi] = cur[bj];
    }
    for (std::size_t i = 0; i < m; ++i) tracks[i].push_back(next[i]);
    prev = std::move(next);
  }
  return tracks;
}

// One positive-frequency axis sample with the loop eigenvalues there.
struct AxisSample {
  double omega = 0.0;
  std::vector<Complex> eigs;
};

// Classical margins read off the paired positive-frequency tracks: the gain
// margin from negative-real-axis crossings, the phase margin from unit-circle
// crossings, both linearly interpolated between samples.
void classical_margins(std::vector<AxisSample> axis, double& gain_margin,
                       double& phase_margin_deg) {
  gain_margin = std::numeric_limits<double>::infinity();
  phase_margin_deg = std::numeric_limits<double>::infinity();
  std::sort(axis.begin(), axis.end(),
            [](const AxisSample& a, const AxisSample& b) { return a.omega < b.omega; });
  std::vector<std::vector<Complex>> per_sample;
  per_sample.reserve(axis.size());
  for (const AxisSample& s : axis) per_sample.push_back(s.eigs);
  for (const std::vector<Complex>& track : pair_tracks(per_sample)) {
    for (std::size_t i = 0; i + 1 < track.size(); ++i) {
      const Complex a = track[i], b = track[i + 1];
      if ((a.imag() <= 0.0) != (b.imag() <= 0.0) && a.imag() != b.imag()) {
        const double t = a.imag() / (a.imag() - b.imag());
        const double re_c = a.real() + t * (b.real() - a.real());
        if (re_c < 0.0) gain_margin = std::min(gain_margin, 1.0 / -re_c);
      }
      const double da = std::abs(a) - 1.0, db = std::abs(b) - 1.0;
      if ((da <= 0.0) != (db <= 0.0) && da != db) {
        const double t = da / (da - db);
        const Complex lam = a + t * (b - a);
        const double away = kPi - std::abs(std::arg(lam));
        phase_margin_deg = std::min(phase_margin_deg, away * 180.0 / kPi);
      }
    }
  }
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Stable:
      return "stable";
    case Verdict::Marginal:
      return "marginal";
    case Verdict::Unstable:
      return "unstable";
  }
  return "unstable";
}

ModeAssessment mode_verdict(std::vector<Complex> modes) {
  ModeAssessment out;
  sort_modes(modes);
  if (!modes.empty()) {
    const double band = kMarginalBand * mode_scale(modes);
    const double re = modes.front().real();
    out.verdict =
        re > band ? Verdict::Unstable : re >= -band ? Verdict::Marginal : Verdict::Stable;
    out.critical = modes.front();
  }
  out.modes = std::move(modes);
  return out;
}

ModeAssessment loop_mode_verdict(const RealDescriptor& loop_impedance) {
  return mode_verdict(invariant_zeros(loop_impedance));
}

ModeAssessment system_mode_verdict(const RealDescriptor& system_admittance) {
  return mode_verdict(invariant_zeros(system_admittance));
}

NyquistAssessment nyquist_verdict(const RealDescriptor& source_impedance,
                                  const RealDescriptor& load_admittance, int refinement) {
  if (!source_impedance.square() || !load_admittance.square())
    throw NonSquareSystem("nyquist_verdict: both blocks must be square");
  if (source_impedance.inputs() != load_admittance.outputs())
    throw DimensionMismatch("nyquist_verdict: port dimensions differ");

  const ComplexDescriptor loop = to_complex(multiply(source_impedance, load_admittance));
  const std::vector<Complex> ps = poles(loop);
  const double scale = mode_scale(ps);
  const double band = kMarginalBand * scale;

  NyquistAssessment out;
  std::vector<Complex> axis_poles;
  for (const Complex& p : ps) {
    if (p.real() > band)
      ++out.rhp_poles;
    else if (p.real() >= -band)
      axis_poles.push_back(p);
  }

  NyquistContour::Options opt;
  opt.radius = kRadiusFactor * scale;
  opt.refinement = std::max(1, refinement);
  NyquistContour contour = NyquistContour::around_rhp(axis_poles, opt);

  const MatXc eye = MatXc::Identity(loop.outputs(), loop.outputs());
  const auto det_shifted = [&](Complex s) { return (eye + evaluate(loop, s)).determinant(); };

  bool on_locus = false;
  try {
    out.winding = winding_with_refinement(contour, det_shifted);
  } catch (const PointOnLocus&) {
    on_locus = true;  // a locus eigenvalue sits at -1: marginal by inspection
  }
  out.samples = contour.size();

  // Closest approach of the eigenvalue loci to -1 over the certified samples:
  // |lambda + 1| equals the eigenvalue magnitude of (I + loop).
  out.min_distance = std::numeric_limits<double>::infinity();
  std::vector<AxisSample> axis;
  for (const Complex& s : contour.points()) {
    const Eigen::ComplexEigenSolver<MatXc> es(eye + evaluate(loop, s), false);
    const double d = es.eigenvalues().cwiseAbs().minCoeff();
    if (d < out.min_distance) {
      out.min_distance = d;
      out.critical_freq_hz = std::abs(s.imag()) / (2.0 * kPi);
    }
    if (s.real() == 0.0 && s.imag() >= 0.0) {
      AxisSample sample;
      sample.omega = s.imag();
      for (Index i = 0; i < es.eigenvalues().size(); ++i)
        sample.eigs.push_back(es.eigenvalues()(i) - 1.0);
      axis.push_back(std::move(sample));
    }
  }
  classical_margins(std::move(axis), out.gain_margin, out.phase_margin_deg);

  out.verdict = on_locus                          ? Verdict::Marginal
                : out.winding == -out.rhp_poles   ? Verdict::Stable
                                                  : Verdict::Unstable;
  return out;
}

EigenLoci eigen_loci(const RealDescriptor& source_impedance,
                     const RealDescriptor& load_admittance, int refinement) {
  if (!source_impedance.square() || !load_admittance.square())
    throw NonSquareSystem("eigen_loci: both blocks must be square");
  if (source_impedance.inputs() != load_admittance.outputs())
    throw DimensionMismatch("eigen_loci: port dimensions differ");

  const ComplexDescriptor loop = to_complex(multiply(source_impedance, load_admittance));
  const std::vector<Complex> ps = poles(loop);
  const double scale = mode_scale(ps);
  const double band = kMarginalBand * scale;

  std::vector<Complex> axis_poles;
  for (const Complex& p : ps)
    if (p.real() <= band && p.real() >= -band) axis_poles.push_back(p);

  NyquistContour::Options opt;
  opt.radius = kRadiusFactor * scale;
  opt.refinement = std::max(1, refinement);
  const NyquistContour contour = NyquistContour::around_rhp(axis_poles, opt);

  std::vector<AxisSample> axis;
  for (const Complex& s : contour.points()) {
    if (s.real() != 0.0 || s.imag() < 0.0) continue;
    const Eigen::ComplexEigenSolver<MatXc> es(evaluate(loop, s), false);
    AxisSample sample;
    sample.omega = s.imag();
    for (Index i = 0; i < es.eigenvalues().size(); ++i)
      sample.eigs.push_back(es.eigenvalues()(i));
    axis.push_back(std::move(sample));
  }
  std::sort(axis.begin(), axis.end(),
            [](const AxisSample& a, const AxisSample& b) { return a.omega < b.omega; });

  EigenLoci out;
  std::vector<std::vector<Complex>> per_sample;
  per_sample.reserve(axis.size());
  for (const AxisSample& s : axis) {
    out.freq_hz.push_back(s.omega / (2.0 * kPi));
    per_sample.push_back(s.eigs);
  }
  out.loci = pair_tracks(per_sample);
  return out;
}

std::vector<PartitionPoint> partition_sweep(const net::NetworkModel& model,
                                            const net::NetworkOperatingPoint& op,
                                            net::IoMode io, const std::vector<double>& ks) {
  std::vector<PartitionPoint> out;
  out.reserve(ks.size());
  for (const double k : ks) {
    const net::PartitionedLoop part = net::partition_at(model, op, io, k);
    PartitionPoint pt;
    pt.k = k;
    pt.nyquist = nyquist_verdict(part.source, part.load_adm);
    std::vector<Complex> lp = poles(part.load_adm);
    sort_modes(lp);
    if (!lp.empty()) {
      pt.rightmost_pole = lp.front();
      const double band = kMarginalBand * mode_scale(lp);
      for (const Complex& p : lp) {
        if (p.real() > band) ++pt.rhp_load_poles;
        // First oscillatory entry in rightmost-first order: the pole pair
        // whose migration the partition family exposes. Reported as the
        // positive-frequency member so conjugate ordering noise cannot leak.
        if (pt.rightmost_pair == Complex(0.0, 0.0) && std::abs(p.imag()) > 1.0)
          pt.rightmost_pair = p.imag() < 0.0 ? std::conj(p) : p;
      }
    }
    pt.load_poles = std::move(lp);
    out.push_back(pt);
  }
  return out;
}

std::vector<DeviceMargin> weak_point_scan(const net::NetworkModel& model,
                                          const net::NetworkOperatingPoint& op,
                                          net::IoMode io) {
  std::vector<DeviceMargin> out;
  for (Index d = 0; d < static_cast<Index>(model.devices.size()); ++d) {
    const RealDescriptor rest = net::rest_admittance(model, op, io, d);
    const RealDescriptor dev = net::device_admittance(model, op, io, d);
    const NyquistAssessment ny = nyquist_verdict(invert(rest), dev);
    out.push_back(
        {model.devices[d].name, ny.min_distance, ny.critical_freq_hz, ny.rhp_poles > 0});
  }
  std::sort(out.begin(), out.end(), [](const DeviceMargin& a, const DeviceMargin& b) {
    if (a.margin != b.margin) return a.margin < b.margin;
    return a.device < b.device;
  });
  return out;
}

}  // namespace impnet
