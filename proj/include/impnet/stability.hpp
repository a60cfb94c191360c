#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "impnet/descriptor.hpp"
#include "impnet/network.hpp"
#include "impnet/types.hpp"

namespace impnet {

enum class Verdict { Stable, Marginal, Unstable };

/// Lowercase name of the verdict ("stable", "marginal", "unstable").
std::string to_string(Verdict v);

/// Outcome of the encirclement test at a network cut. The loop operator is
/// the product of the source-side impedance and the load-side admittance; the
/// cut is stable exactly when the clockwise encirclements of -1 by its
/// eigenvalue loci cancel the loop operator's own right-half-plane poles.
struct NyquistAssessment {
  Verdict verdict = Verdict::Stable;
  int winding = 0;            ///< net clockwise encirclements of -1
  int rhp_poles = 0;          ///< loop-operator poles right of the margin strip
  std::size_t samples = 0;    ///< contour samples the winding was certified on
  double min_distance = 0.0;  ///< closest approach of the loci to -1
  double critical_freq_hz = 0.0;  ///< axis frequency of the closest approach
  /// Supplementary classical margins read off the loci: smallest factor by
  /// which a locus magnitude at a negative-real-axis crossing must grow to
  /// reach -1, and smallest angular distance to 180 degrees at unit
  /// magnitude. Infinity when a locus never crosses the respective curve.
  double gain_margin = 0.0;
  double phase_margin_deg = 0.0;
};

/// Encirclement test for the loop formed by a source impedance block against
/// a load admittance block of the same port dimension. `refinement` uniformly
/// densifies the base contour; the integer winding must not depend on it.
NyquistAssessment nyquist_verdict(const RealDescriptor& source_impedance,
                                  const RealDescriptor& load_admittance,
                                  int refinement = 1);

/// Eigenvalue tracks of the loop operator along the positive-frequency axis
/// samples of the encirclement contour, continued across frequencies by
/// minimal-displacement matching so each track stays one locus.
struct EigenLoci {
  std::vector<double> freq_hz;             ///< ascending axis frequencies
  std::vector<std::vector<Complex>> loci;  ///< [locus][sample], aligned to freq_hz
};

/// Sample the eigenvalue loci of source impedance times load admittance.
EigenLoci eigen_loci(const RealDescriptor& source_impedance,
                     const RealDescriptor& load_admittance, int refinement = 1);

/// Closed-loop modes listed rightmost first, with the verdict the rightmost
/// one implies.
struct ModeAssessment {
  Verdict verdict = Verdict::Stable;
  std::vector<Complex> modes;
  Complex critical{0.0, 0.0};  ///< rightmost mode; zero when none exist
};

/// Classify an already-computed mode list.
ModeAssessment mode_verdict(std::vector<Complex> modes);

/// Modes read off the invariant zeros of the loop impedance at the grid cut.
ModeAssessment loop_mode_verdict(const RealDescriptor& loop_impedance);

/// Modes read off the invariant zeros of the whole-system admittance.
ModeAssessment system_mode_verdict(const RealDescriptor& system_admittance);

/// Encirclement test at one member of the partition family, together with
/// how the open-loop pole count has shifted across the cut.
struct PartitionPoint {
  double k = 0.0;
  NyquistAssessment nyquist;
  std::vector<Complex> load_poles;   ///< load-side open-loop poles, rightmost first
  Complex rightmost_pole{0.0, 0.0};  ///< rightmost load-side pole at this cut
  Complex rightmost_pair{0.0, 0.0};  ///< rightmost oscillatory load-side pole
  int rhp_load_poles = 0;            ///< load-side poles right of the strip
};

/// Sweep the cut over the given fractions of the source impedance. The
/// verdict must come out the same at every k; what moves is the split between
/// encirclements and open-loop right-half-plane poles.
std::vector<PartitionPoint> partition_sweep(const net::NetworkModel& model,
                                            const net::NetworkOperatingPoint& op,
                                            net::IoMode io, const std::vector<double>& ks);

/// How close one converter's loop against the rest of the network comes to
/// the critical point.
struct DeviceMargin {
  std::string device;
  double margin = 0.0;   ///< closest approach of the device's loci to -1
  double freq_hz = 0.0;  ///< axis frequency where it happens
  /// True when the device's cut has open-loop poles right of the margin
  /// strip, so the distance alone understates the encirclement requirement.
  bool pole_adjusted = false;
};

/// Margin of every converter against the rest of the network seen from its
/// own ports, weakest first.
std::vector<DeviceMargin> weak_point_scan(const net::NetworkModel& model,
                                          const net::NetworkOperatingPoint& op, net::IoMode io);

}  // namespace impnet
