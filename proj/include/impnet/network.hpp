#pragma once

#include <string>
#include <vector>

#include "impnet/components.hpp"
#include "impnet/descriptor.hpp"
#include "impnet/types.hpp"

namespace impnet::net {

/// Whether device blocks are re-referenced from their own operating-point
/// frames into the shared area frame before composition, or used as-is.
/// LocalFramesIgnored reproduces the naive composition that drops the frame
/// alignment step; it exists for comparison runs, not for analysis.
enum class IoMode { Rereferenced, LocalFramesIgnored };

struct Device {
  std::string name;
  Index bus = 0;
  VscParams params;
  double p_set = 0.0;  // active injection setpoint (power control)
  double q_set = 0.0;  // reactive injection setpoint (grid-following modes)
  double u_set = 1.0;  // ac magnitude (grid-forming) or dc voltage setpoint
};

struct Branch {
  std::string name;
  Index from = 0, to = 0;
  BranchParams params;
};

struct Shunt {
  Index bus = 0;
  double c = 0.0;  // p.u. susceptance at the base frequency
};

struct TheveninSource {
  Index bus = 0;
  double emf = 1.0;
  BranchParams zs;
};

/// Dc coupling between a grid-forming sending converter and a dc-voltage
/// controlled receiving converter, with the link capacitance at the dc node.
struct DcLink {
  Index sending = 0, receiving = 0;  // device indices
  double cap_c = 0.0;                // p.u. susceptance of the dc capacitor
};

struct NetworkModel {
  Index buses = 0;
  std::vector<Device> devices;
  std::vector<Branch> branches;
  std::vector<Shunt> shunts;
  std::vector<DcLink> links;
  bool has_grid = false;
  TheveninSource grid;
};

/// Structural checks: index ranges, ac connectivity, exactly one frame
/// reference per ac area, link endpoints with matching control modes.
void validate(const NetworkModel& model);

/// Ac area id per bus (areas are the connected components of the branch graph).
std::vector<Index> bus_areas(const NetworkModel& model);

struct NetworkOperatingPoint {
  VecXc bus_v;                              // phasor per bus, in its area frame
  std::vector<AcOperatingPoint> device_ac;  // per device, area frame
  std::vector<DcOperatingPoint> device_dc;  // per device (default for ac-only)
  Complex grid_injection;                   // power the grid source supplies
};

/// Steady state of the whole model: per-area power flow with the dc links
/// balanced, grid-forming buses and the grid source pinning their area frames.
NetworkOperatingPoint solve_operating_point(const NetworkModel& model);

/// Whole-system admittance block: one (d, q) port pair per bus followed by one
/// port per dc link node. Bus-voltage perturbations in, net element currents
/// out; its invariant zeros are the closed-loop modes, including any that a
/// coincident element pole hides from the determinant alone.
RealDescriptor system_admittance(const NetworkModel& model, const NetworkOperatingPoint& op,
                                 IoMode io);

/// Admittance of everything except the grid source, seen at the grid bus.
RealDescriptor load_admittance(const NetworkModel& model, const NetworkOperatingPoint& op,
                               IoMode io);

/// Series impedance of the grid source branch.
RealDescriptor source_impedance(const NetworkModel& model);

/// Loop impedance at the grid interface: load impedance plus source impedance.
/// Its invariant zeros in the right half plane are the unstable closed-loop
/// modes.
RealDescriptor loop_impedance(const NetworkModel& model, const NetworkOperatingPoint& op,
                              IoMode io);

struct PartitionedLoop {
  RealDescriptor source;     // (1 - k) of the source impedance
  RealDescriptor load_adm;   // load admittance with k of the source absorbed
};

/// Move fraction k of the source impedance into the load side of the cut.
PartitionedLoop partition_at(const NetworkModel& model, const NetworkOperatingPoint& op,
                             IoMode io, double k);

/// Scalar source/load pair at one dc link node: the receiving side inverted
/// as the source, the sending side plus the link capacitor as the load.
PartitionedLoop dc_cut(const NetworkModel& model, const NetworkOperatingPoint& op, IoMode io,
                       Index link);

/// One device's own admittance block on its ports: the bus (d, q) pair plus
/// its dc link node when it has one.
RealDescriptor device_admittance(const NetworkModel& model, const NetworkOperatingPoint& op,
                                 IoMode io, Index device);

/// Admittance of every element except one device, eliminated down to that
/// device's own ports; pairs with device_admittance to close the loop a
/// single converter sees.
RealDescriptor rest_admittance(const NetworkModel& model, const NetworkOperatingPoint& op,
                               IoMode io, Index device);

/// Scalar admittance looking from the dc link node into one converter and its
/// ac area, with the link capacitor and the far side removed.
RealDescriptor dc_side_admittance(const NetworkModel& model, const NetworkOperatingPoint& op,
                                  IoMode io, Index device);

}  // namespace impnet::net
