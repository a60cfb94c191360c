#include "impnet/network.hpp"

#include <algorithm>
#include <optional>
#include <queue>
#include <utility>

#include "impnet/errors.hpp"
#include "impnet/frames.hpp"
#include "impnet/powerflow.hpp"

namespace impnet::net {
namespace {

using Mode = VscParams::Mode;

Index link_of_device(const NetworkModel& model, Index d) {
  for (Index l = 0; l < static_cast<Index>(model.links.size()); ++l)
    if (model.links[l].sending == d || model.links[l].receiving == d) return l;
  return -1;
}

}  // namespace

std::vector<Index> bus_areas(const NetworkModel& model) {
  std::vector<Index> area(model.buses, -1);
  Index next = 0;
  for (Index b0 = 0; b0 < model.buses; ++b0) {
    if (area[b0] >= 0) continue;
    area[b0] = next;
    std::queue<Index> frontier;
    frontier.push(b0);
    while (!frontier.empty()) {
      const Index b = frontier.front();
      frontier.pop();
      for (const Branch& br : model.branches) {
        Index other = -1;
        if (br.from == b)
          other = br.to;
        else if (br.to == b)
          other = br.from;
        if (other >= 0 && area[other] < 0) {
          area[other] = next;
          frontier.push(other);
        }
      }
    }
    ++next;
  }
  return area;
}

void validate(const NetworkModel& model) {
  if (model.buses < 1) throw InvalidNetwork("network needs at least one bus");
  const auto bus_ok = [&](Index b) { return b >= 0 && b < model.buses; };
  for (const Branch& br : model.branches) {
    if (!bus_ok(br.from) || !bus_ok(br.to) || br.from == br.to)
      throw InvalidNetwork("branch endpoints out of range");
  }
  for (const Shunt& sh : model.shunts) {
    if (!bus_ok(sh.bus)) throw InvalidNetwork("shunt bus out of range");
    if (sh.c <= 0.0) throw InvalidNetwork("shunt susceptance must be positive");
  }
  for (const Device& dev : model.devices)
    if (!bus_ok(dev.bus)) throw InvalidNetwork("device bus out of range");
  if (model.has_grid && !bus_ok(model.grid.bus))
    throw InvalidNetwork("grid bus out of range");

  std::vector<bool> touched(model.buses, false);
  for (const Branch& br : model.branches) touched[br.from] = touched[br.to] = true;
  for (const Shunt& sh : model.shunts) touched[sh.bus] = true;
  for (const Device& dev : model.devices) touched[dev.bus] = true;
  if (model.has_grid) touched[model.grid.bus] = true;
  for (Index b = 0; b < model.buses; ++b)
    if (!touched[b]) throw InvalidNetwork("bus with nothing attached");

  const std::vector<Index> area = bus_areas(model);
  const Index nareas = model.buses == 0 ? 0 : 1 + *std::max_element(area.begin(), area.end());
  const Index ndev = static_cast<Index>(model.devices.size());

  std::vector<int> linked(ndev, 0);
  for (const DcLink& lk : model.links) {
    if (lk.sending < 0 || lk.sending >= ndev || lk.receiving < 0 || lk.receiving >= ndev)
      throw InvalidNetwork("dc link device index out of range");
    if (model.devices[lk.sending].params.mode != Mode::VoltageFrequencyControl)
      throw InvalidNetwork("dc link sending end must be a grid-forming converter");
    if (model.devices[lk.receiving].params.mode != Mode::DcVoltageControl)
      throw InvalidNetwork("dc link receiving end must control the dc voltage");
    if (lk.cap_c <= 0.0) throw InvalidNetwork("dc link capacitance must be positive");
    if (++linked[lk.sending] > 1 || ++linked[lk.receiving] > 1)
      throw InvalidNetwork("device attached to more than one dc link");
    if (area[model.devices[lk.sending].bus] == area[model.devices[lk.receiving].bus])
      throw InvalidNetwork("back-to-back dc links within one ac area are not supported");
  }
  for (Index d = 0; d < ndev; ++d)
    if (model.devices[d].params.mode == Mode::DcVoltageControl && linked[d] == 0)
      throw InvalidNetwork("dc-voltage controlled converter needs a dc link");

  std::vector<int> refs(nareas, 0);
  std::vector<bool> vf_ref(nareas, false);
  if (model.has_grid) ++refs[area[model.grid.bus]];
  for (const Device& dev : model.devices) {
    if (dev.params.mode == Mode::VoltageFrequencyControl) {
      ++refs[area[dev.bus]];
      vf_ref[area[dev.bus]] = true;
    }
  }
  for (Index a = 0; a < nareas; ++a)
    if (refs[a] != 1)
      throw InvalidNetwork("each ac area needs exactly one frame reference "
                           "(the grid source or one grid-forming converter)");
  for (const Device& dev : model.devices)
    if (dev.params.mode == Mode::DcVoltageControl && vf_ref[area[dev.bus]])
      throw InvalidNetwork("dc-voltage control inside a grid-forming area is not supported");
}

NetworkOperatingPoint solve_operating_point(const NetworkModel& model) {
  validate(model);
  const std::vector<Index> area = bus_areas(model);
  const Index nareas = 1 + *std::max_element(area.begin(), area.end());
  const Index ndev = static_cast<Index>(model.devices.size());

  std::vector<std::vector<Index>> abuses(nareas);
  std::vector<Index> local(model.buses, -1);
  for (Index b = 0; b < model.buses; ++b) {
    local[b] = static_cast<Index>(abuses[area[b]].size());
    abuses[area[b]].push_back(b);
  }
  std::vector<Index> ref_device(nareas, -1);
  std::vector<bool> grid_ref(nareas, false);
  if (model.has_grid) grid_ref[area[model.grid.bus]] = true;
  std::vector<bool> has_dcv(nareas, false);
  for (Index d = 0; d < ndev; ++d) {
    const Device& dev = model.devices[d];
    if (dev.params.mode == Mode::VoltageFrequencyControl) ref_device[area[dev.bus]] = d;
    if (dev.params.mode == Mode::DcVoltageControl) has_dcv[area[dev.bus]] = true;
  }

  NetworkOperatingPoint out;
  out.bus_v = VecXc::Zero(model.buses);
  out.device_ac.resize(ndev);
  out.device_dc.assign(ndev, DcOperatingPoint{1.0});
  out.grid_injection = Complex(0.0, 0.0);
  std::vector<Complex> dev_inj(ndev, Complex(0.0, 0.0));
  for (const DcLink& lk : model.links) {
    const DcOperatingPoint dc{model.devices[lk.receiving].u_set};
    out.device_dc[lk.sending] = dc;
    out.device_dc[lk.receiving] = dc;
  }

  const auto solve_area = [&](Index a, const std::vector<std::pair<Index, Complex>>& extra) {
    const auto& buses = abuses[a];
    const Index na = static_cast<Index>(buses.size());
    const bool g = grid_ref[a];
    powerflow::PowerflowSpec spec = powerflow::PowerflowSpec::empty(na + (g ? 1 : 0));
    for (const Branch& br : model.branches)
      if (area[br.from] == a) powerflow::add_branch(spec, local[br.from], local[br.to], br.params);
    for (const Shunt& sh : model.shunts)
      if (area[sh.bus] == a) powerflow::add_shunt(spec, local[sh.bus], Complex(0.0, sh.c));
    if (g) {
      powerflow::add_branch(spec, na, local[model.grid.bus], model.grid.zs);
      spec.slack = na;
      spec.slack_mag = model.grid.emf;
    } else {
      const Device& vf = model.devices[ref_device[a]];
      spec.slack = local[vf.bus];
      spec.slack_mag = vf.u_set;
    }
    for (Index d = 0; d < ndev; ++d) {
      const Device& dev = model.devices[d];
      if (area[dev.bus] == a && dev.params.mode == Mode::PowerControl)
        spec.injections(local[dev.bus]) += Complex(dev.p_set, dev.q_set);
    }
    for (const auto& [d, s] : extra) spec.injections(local[model.devices[d].bus]) += s;
    return powerflow::solve_powerflow(spec);
  };

  std::vector<std::optional<powerflow::PowerflowSolution>> sols(nareas);
  const auto commit = [&](Index a, const powerflow::PowerflowSolution& sol) {
    for (Index i = 0; i < static_cast<Index>(abuses[a].size()); ++i)
      out.bus_v(abuses[a][i]) = sol.v(i);
    if (grid_ref[a]) out.grid_injection = sol.slack_injection;
    sols[a] = sol;
  };

  for (Index a = 0; a < nareas; ++a)
    if (!has_dcv[a]) commit(a, solve_area(a, {}));

  for (Index d = 0; d < ndev; ++d) {
    const Device& dev = model.devices[d];
    if (dev.params.mode == Mode::PowerControl) dev_inj[d] = Complex(dev.p_set, dev.q_set);
    if (dev.params.mode == Mode::VoltageFrequencyControl) {
      if (!sols[area[dev.bus]])
        throw InvalidNetwork("grid-forming area could not be solved first");
      dev_inj[d] = sols[area[dev.bus]]->slack_injection;
    }
  }

  for (const DcLink& lk : model.links) {
    const Device& snd = model.devices[lk.sending];
    const Device& rcv = model.devices[lk.receiving];
    const double p_push =
        -powerflow::dc_port_power(dev_inj[lk.sending], out.bus_v(snd.bus), snd.params.rf);
    const Index ra = area[rcv.bus];
    double p_inj = p_push;
    bool settled = false;
    for (int it = 0; it < 100 && !settled; ++it) {
      const powerflow::PowerflowSolution sol =
          solve_area(ra, {{lk.receiving, Complex(p_inj, rcv.q_set)}});
      const Complex v_r = sol.v(local[rcv.bus]);
      const double draw =
          powerflow::dc_port_power(Complex(p_inj, rcv.q_set), v_r, rcv.params.rf);
      commit(ra, sol);
      const double err = draw - p_push;
      if (std::abs(err) < 1e-12)
        settled = true;
      else
        p_inj -= err;
    }
    if (!settled) throw NoConvergence("dc link power balance did not settle");
    dev_inj[lk.receiving] = Complex(p_inj, rcv.q_set);
  }

  for (Index d = 0; d < ndev; ++d)
    out.device_ac[d] = powerflow::device_operating_point(out.bus_v(model.devices[d].bus),
                                                         dev_inj[d]);
  return out;
}

namespace {

RealDescriptor scatter_block(const RealDescriptor& g, const std::vector<Index>& ports,
                             Index total) {
  MatXd sel = MatXd::Zero(g.inputs(), total);
  for (std::size_t i = 0; i < ports.size(); ++i)
    sel(static_cast<Index>(i), ports[i]) = 1.0;
  return transform_outputs(transform_inputs(g, sel), MatXd(sel.transpose()));
}

RealDescriptor device_block(const NetworkModel& model, const NetworkOperatingPoint& op,
                            IoMode io, Index d) {
  const Device& dev = model.devices[d];
  const AcOperatingPoint& ac = op.device_ac[d];
  if (dev.params.mode == Mode::PowerControl) {
    RealDescriptor blk = vsc_admittance(dev.params, ac);
    return io == IoMode::Rereferenced ? rereference(blk, ac.theta) : blk;
  }
  RealDescriptor blk = converter_acdc_block(dev.params, ac, op.device_dc[d]);
  return io == IoMode::Rereferenced ? rereference_acdc(blk, ac.theta) : blk;
}

struct AssembleOptions {
  bool include_grid = true;
  bool include_link_caps = true;
  Index skip_device = -1;
  std::vector<bool> keep_bus;
  std::vector<bool> keep_link;
};

RealDescriptor assemble(const NetworkModel& model, const NetworkOperatingPoint& op, IoMode io,
                        const AssembleOptions& o) {
  const Index nlink = static_cast<Index>(model.links.size());
  std::vector<Index> bus_port(model.buses, -1), link_port(nlink, -1);
  Index total = 0;
  for (Index b = 0; b < model.buses; ++b)
    if (o.keep_bus[b]) {
      bus_port[b] = total;
      total += 2;
    }
  for (Index l = 0; l < nlink; ++l)
    if (o.keep_link[l]) link_port[l] = total++;

  RealDescriptor acc = RealDescriptor::gain(MatXd::Zero(total, total));
  for (const Branch& br : model.branches) {
    if (bus_port[br.from] < 0 || bus_port[br.to] < 0) continue;
    acc = add(acc, scatter_block(branch_two_port(br.params),
                                 {bus_port[br.from], bus_port[br.from] + 1, bus_port[br.to],
                                  bus_port[br.to] + 1},
                                 total));
  }
  for (const Shunt& sh : model.shunts) {
    if (bus_port[sh.bus] < 0) continue;
    acc = add(acc, scatter_block(shunt_cap_admittance(sh.c),
                                 {bus_port[sh.bus], bus_port[sh.bus] + 1}, total));
  }
  if (o.include_grid && model.has_grid && bus_port[model.grid.bus] >= 0)
    acc = add(acc, scatter_block(branch_shunt_admittance(model.grid.zs),
                                 {bus_port[model.grid.bus], bus_port[model.grid.bus] + 1},
                                 total));
  for (Index d = 0; d < static_cast<Index>(model.devices.size()); ++d) {
    const Index bp = bus_port[model.devices[d].bus];
    if (bp < 0 || d == o.skip_device) continue;
    RealDescriptor blk = device_block(model, op, io, d);
    if (blk.inputs() == 2) {
      acc = add(acc, scatter_block(blk, {bp, bp + 1}, total));
      continue;
    }
    const Index l = link_of_device(model, d);
    if (l >= 0 && link_port[l] >= 0) {
      acc = add(acc, scatter_block(blk, {bp, bp + 1, link_port[l]}, total));
    } else {
      // dc node held stiff: drop the dc port from the block
      acc = add(acc, scatter_block(subsystem(blk, {0, 1}, {0, 1}), {bp, bp + 1}, total));
    }
  }
  if (o.include_link_caps) {
    for (Index l = 0; l < nlink; ++l)
      if (link_port[l] >= 0)
        acc = add(acc, scatter_block(differentiator(model.links[l].cap_c / kOmegaBase),
                                     {link_port[l]}, total));
  }
  return acc;
}

AssembleOptions keep_all(const NetworkModel& model) {
  AssembleOptions o;
  o.keep_bus.assign(model.buses, true);
  o.keep_link.assign(model.links.size(), true);
  return o;
}

void require_grid(const NetworkModel& model) {
  if (!model.has_grid)
    throw InvalidNetwork("this analysis needs the grid source in the model");
}

}  // namespace

RealDescriptor system_admittance(const NetworkModel& model, const NetworkOperatingPoint& op,
                                 IoMode io) {
  validate(model);
  return assemble(model, op, io, keep_all(model));
}

RealDescriptor load_admittance(const NetworkModel& model, const NetworkOperatingPoint& op,
                               IoMode io) {
  validate(model);
  require_grid(model);
  AssembleOptions o = keep_all(model);
  o.include_grid = false;
  const RealDescriptor all = assemble(model, op, io, o);
  std::vector<Index> elim;
  for (Index p = 0; p < all.inputs(); ++p)
    if (p != 2 * model.grid.bus && p != 2 * model.grid.bus + 1) elim.push_back(p);
  return eliminate_ports(all, elim);
}

RealDescriptor source_impedance(const NetworkModel& model) {
  validate(model);
  require_grid(model);
  return branch_series_impedance(model.grid.zs);
}

RealDescriptor loop_impedance(const NetworkModel& model, const NetworkOperatingPoint& op,
                              IoMode io) {
  return add(invert(load_admittance(model, op, io)), source_impedance(model));
}

PartitionedLoop partition_at(const NetworkModel& model, const NetworkOperatingPoint& op,
                             IoMode io, double k) {
  if (k < 0.0 || k > 1.0)
    throw ConfigError("partition fraction must lie in [0, 1]");
  const RealDescriptor zs = source_impedance(model);
  const RealDescriptor yload = load_admittance(model, op, io);
  PartitionedLoop part{scale(zs, 1.0 - k),
                       invert(add(invert(yload), scale(zs, k)))};
  return part;
}

namespace {

// Port indices of one device in the keep-everything layout: its bus pair,
// then its dc link node when it has one.
std::vector<Index> device_ports(const NetworkModel& model, Index device) {
  std::vector<Index> ports{2 * model.devices[device].bus, 2 * model.devices[device].bus + 1};
  const Index l = link_of_device(model, device);
  if (l >= 0) ports.push_back(2 * model.buses + l);
  return ports;
}

void require_device(const NetworkModel& model, Index device) {
  if (device < 0 || device >= static_cast<Index>(model.devices.size()))
    throw InvalidNetwork("device index out of range");
}

}  // namespace

RealDescriptor device_admittance(const NetworkModel& model, const NetworkOperatingPoint& op,
                                 IoMode io, Index device) {
  validate(model);
  require_device(model, device);
  RealDescriptor blk = device_block(model, op, io, device);
  if (blk.inputs() == 3 && link_of_device(model, device) < 0)
    blk = subsystem(blk, {0, 1}, {0, 1});  // dc node held stiff, as in assembly
  return blk;
}

RealDescriptor rest_admittance(const NetworkModel& model, const NetworkOperatingPoint& op,
                               IoMode io, Index device) {
  validate(model);
  require_device(model, device);
  AssembleOptions o = keep_all(model);
  o.skip_device = device;
  const RealDescriptor all = assemble(model, op, io, o);
  const std::vector<Index> keep = device_ports(model, device);
  std::vector<Index> elim;
  for (Index p = 0; p < all.inputs(); ++p)
    if (std::find(keep.begin(), keep.end(), p) == keep.end()) elim.push_back(p);
  return eliminate_ports(all, elim);
}

PartitionedLoop dc_cut(const NetworkModel& model, const NetworkOperatingPoint& op, IoMode io,
                       Index link) {
  validate(model);
  if (link < 0 || link >= static_cast<Index>(model.links.size()))
    throw InvalidNetwork("dc link index out of range");
  const DcLink& lk = model.links[link];
  const RealDescriptor send = dc_side_admittance(model, op, io, lk.sending);
  const RealDescriptor recv = dc_side_admittance(model, op, io, lk.receiving);
  return {invert(recv), add(send, differentiator(lk.cap_c / kOmegaBase))};
}

RealDescriptor dc_side_admittance(const NetworkModel& model, const NetworkOperatingPoint& op,
                                  IoMode io, Index device) {
  validate(model);
  require_device(model, device);
  const Index l = link_of_device(model, device);
  if (l < 0) throw InvalidNetwork("device has no dc link to probe");
  const std::vector<Index> area = bus_areas(model);
  const Index a = area[model.devices[device].bus];
  AssembleOptions o;
  o.keep_bus.assign(model.buses, false);
  for (Index b = 0; b < model.buses; ++b) o.keep_bus[b] = area[b] == a;
  o.keep_link.assign(model.links.size(), false);
  o.keep_link[l] = true;
  o.include_link_caps = false;
  const RealDescriptor side = assemble(model, op, io, o);
  std::vector<Index> elim(side.inputs() - 1);
  for (Index p = 0; p + 1 < side.inputs(); ++p) elim[p] = p;  // dc node is last
  return eliminate_ports(side, elim);
}

}  // namespace impnet::net
