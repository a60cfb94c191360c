#pragma once

#include "impnet/components.hpp"
#include "impnet/types.hpp"

namespace impnet::powerflow {

/// Single-area phasor power-flow problem at the base frequency.  Buses are
/// 0..n-1 with exactly one fixed-voltage bus (angle zero by convention);
/// every other bus carries a specified complex power injection, zero where
/// nothing connects.
struct PowerflowSpec {
  Index n = 0;
  Index slack = 0;
  double slack_mag = 1.0;
  MatXc ybus;        // n x n nodal admittance matrix
  VecXc injections;  // specified injections into the network, per bus

  static PowerflowSpec empty(Index n_buses);
};

/// Stamp a series branch between buses a and b into the admittance matrix.
void add_branch(PowerflowSpec& spec, Index a, Index b, const BranchParams& p);

/// Stamp a shunt admittance at one bus.
void add_shunt(PowerflowSpec& spec, Index bus, Complex y);

struct PowerflowSolution {
  VecXc v;                  // bus voltage phasors
  Complex slack_injection;  // power balance picked up by the fixed-voltage bus
  Index iterations = 0;
};

/// Newton solve in rectangular voltage coordinates with the analytic Jacobian.
/// Throws NoConvergence when the residual cannot be brought under 1e-12.
PowerflowSolution solve_powerflow(const PowerflowSpec& spec);

/// Operating point seen by a device at a solved bus: voltage phasor plus the
/// power it injects into the network.
AcOperatingPoint device_operating_point(Complex v, Complex s_inj);

/// Active power a converter draws from its dc port when it injects s_inj into
/// a bus held at phasor v, behind filter resistance rf.  Negative means the
/// converter feeds the dc side.
double dc_port_power(Complex s_inj, Complex v, double rf);

}  // namespace impnet::powerflow
