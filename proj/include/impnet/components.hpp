#pragma once

#include "impnet/descriptor.hpp"
#include "impnet/types.hpp"

namespace impnet {

/// Per-unit series branch: resistance r and reactance x quoted at the base
/// frequency, so the realized inductance is x divided by the base frequency.
struct BranchParams {
  double r = 0.0;
  double x = 0.0;
};

/// Converter parameters: control bandwidths in hertz plus the ac filter and,
/// for dc-coupled converters, the dc link capacitance (per-unit susceptance
/// at the base frequency).
struct VscParams {
  enum class Mode {
    PowerControl,            // grid-following, active/reactive power loops
    DcVoltageControl,        // grid-following, dc-bus voltage + reactive loops
    VoltageFrequencyControl  // grid-forming, fixed frequency + ac voltage loop
  };
  Mode mode = Mode::PowerControl;
  double cc_hz = 300.0;    // current control bandwidth
  double pll_hz = 20.0;    // phase tracking bandwidth (unused for grid-forming)
  double outer_hz = 20.0;  // active-power, dc-voltage or ac-voltage loop bandwidth
  double q_hz = 0.0;       // reactive loop bandwidth; 0 reuses outer_hz
  double lf = 0.15;        // filter reactance, p.u.
  double rf = 0.005;       // filter resistance, p.u.
  double link_c = 0.0;     // dc link capacitance, p.u. (dc-coupled modes only)
};

/// Ac terminal condition from the steady-state flow solution. theta is the
/// bus voltage angle relative to the area reference frame; p and q are the
/// powers the device injects into the bus.
struct AcOperatingPoint {
  double u_mag = 1.0;
  double theta = 0.0;
  double p = 0.0;
  double q = 0.0;
};

struct DcOperatingPoint {
  double u_dc = 1.0;
};

/// Loop gains realized from the bandwidth parameters.
struct VscGains {
  double kp_c = 0.0, ki_c = 0.0;      // current PI
  double kp_pll = 0.0, ki_pll = 0.0;  // phase-tracking PI
  double kp_od = 0.0, ki_od = 0.0;    // active-power PI
  double kp_oq = 0.0, ki_oq = 0.0;    // reactive-power PI
  double kp_dc = 0.0, ki_dc = 0.0;    // dc-voltage PI
  double kp_v = 0.0, ki_v = 0.0;      // ac-voltage PI
};

VscGains vsc_gains(const VscParams& p);

/// Series branch as a two-port admittance block: ports (bus1 d,q | bus2 d,q),
/// outputs are the currents flowing into each port from its bus.
RealDescriptor branch_two_port(const BranchParams& p);

/// The same branch with the far end grounded, as a one-port admittance: the
/// small-signal model of a stiff source behind an impedance, or of a shunt.
RealDescriptor branch_shunt_admittance(const BranchParams& p);

/// Shunt capacitor admittance (c = p.u. susceptance at base frequency). The
/// response grows with s, realized exactly in descriptor form.
RealDescriptor shunt_cap_admittance(double c);

/// One-port block y = c s u (dc capacitor, test probes).
RealDescriptor differentiator(double c);

/// Series branch as a 2x2 impedance block: current perturbation (d, q) in,
/// voltage drop across the branch out. Improper, realized in descriptor form.
RealDescriptor branch_series_impedance(const BranchParams& p);

/// Grid-following converter admittance in its own operating-point frame:
/// inputs are the bus voltage perturbation (d, q), outputs the current into
/// the converter. Callers re-reference to the area frame when composing.
RealDescriptor vsc_admittance(const VscParams& p, const AcOperatingPoint& op);

/// Dc-coupled converter as a 3x3 block: ports (ac d, ac q, dc), admittance
/// orientation (voltages in, into-device currents out), ac side expressed in
/// the converter's operating-point frame. Grid-following dc-voltage control
/// or grid-forming fixed-frequency control depending on mode.
RealDescriptor converter_acdc_block(const VscParams& p, const AcOperatingPoint& op,
                                    const DcOperatingPoint& dc);

}  // namespace impnet
