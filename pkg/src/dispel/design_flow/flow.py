"""Route estimation, timing optimization and the end-to-end flow run.

Routing assigns each net an HPWL length and a signal layer by length
thresholds (short nets on M2/M3, medium on M4/M5, long on M6; the layer
within a pair follows the net's dominant direction), with two vias per
routing level hop. Optimization alternates buffer insertion on wire-delay
dominated critical nets with greedy upsizing along the worst path; both
act only on timing quantities, never on the target frequency, so runs at
higher f_TAR simply continue the same trajectory further. The achieved
frequency folds the final slack back into the clock: 1/f_ACH = 1/f_TAR -
t_SLACK.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace

from ..errors import DomainError, ParameterError
from ..interconnect import TechStack, via_resistance, wire_rc_per_um
from .netlist import Netlist
from .placement import Floorplan, Placement, make_floorplan, place
from .sta import TimingReport, annotate_timing, sta, wire_delay_ps

RESULT_COLUMNS = ("config_hash", "v_dd_V", "f_tar_GHz", "f_ach_GHz", "t_slack_ns",
                  "energy_pJ", "power_mW", "cell_area_um2", "die_area_um2",
                  "buffer_count", "avg_net_len_um", "shareR", "shareC")

_LAYER_HOPS = {"M2": 1, "M3": 2, "M4": 3, "M5": 4, "M6": 5}
_VIA_LADDER = ("V1", "V2", "V3", "V4", "V5")


@dataclass
class RoutedNet:
    name: str
    length_um: float
    layer: str
    n_vias: int
    r_wire_ohm: float
    c_wire_fF: float
    r_via_ohm: float
    c_pins_fF: float = 0.0  # filled in by timing annotation


@dataclass(frozen=True)
class FlowConfig:
    clock_uncertainty_frac: float = 0.05
    io_cap_fF: float = 2.0
    activity: float = 0.1
    utilization: float = 0.60
    aspect: float = 1.0
    buffer_wire_delay_ratio: float = 0.35
    buffer_cell: str = "BUF_X4"
    max_buffers_per_net: int = 4
    util_max: float = 0.95
    max_rounds: int = 60
    no_improve_rounds: int = 3
    short_net_cgp: float = 20.0   # layer-assignment thresholds, in CGP units
    mid_net_cgp: float = 100.0
    moves_per_cell: int = 200
    seed: int = 0


@dataclass
class Design:
    """Mutable working view the timer runs on: gates are cell names, nets
    carry routed RC, and buffer insertion may extend all of these."""

    gates: dict            # id -> cell name
    gate_pins: dict        # id -> (input nets tuple, output net)
    regs: dict
    pins: list
    driver: dict
    sinks: dict
    nets: dict             # net -> RoutedNet
    io_cap_fF: float
    buffer_count: int = 0

    def gate_inputs(self, gid):
        return self.gate_pins[gid][0]

    def gate_output(self, gid):
        return self.gate_pins[gid][1]


@dataclass
class RoutedDesign:
    netlist: Netlist
    placement: Placement
    stack: TechStack
    nets: dict
    cgp_nm: float


@dataclass
class OptimizedDesign:
    design: Design
    report: TimingReport
    placement: Placement
    stack: TechStack
    rounds: int
    cell_area_um2: float


@dataclass
class DesignResult:
    config_hash: str
    v_dd_V: float
    f_tar_GHz: float
    f_ach_GHz: float
    t_slack_ns: float
    energy_pJ: float
    power_mW: float
    cell_area_um2: float
    die_area_um2: float
    buffer_count: int
    avg_net_len_um: float
    shareR: float
    shareC: float
    critical_path: list = field(default_factory=list, repr=False)
    layer_stats: dict = field(default_factory=dict, repr=False)
    lib_id: str = ""
    stack_id: str = ""
    netlist_hash: str = ""

    def csv_row(self):
        return [getattr(self, c) for c in RESULT_COLUMNS]


def f_ach(f_tar: float, t_slack: float) -> float:
    """Achieved clock frequency: 1/f_ACH = 1/f_TAR - t_SLACK (GHz, ns)."""
    period = 1.0 / f_tar - t_slack
    if period <= 0:
        raise DomainError(f"non-positive effective period: 1/{f_tar} - {t_slack}")
    return 1.0 / period


def _position_of(placement: Placement, netlist: Netlist, who):
    kind, ident = who[0], who[1]
    if kind == "pin":
        return placement.io_positions[ident]
    return placement.positions[ident]


def route_estimate(placement: Placement, stack: TechStack, netlist: Netlist,
                   cgp_nm: float) -> RoutedDesign:
    """Assign per-net length, layer, vias and RC from the placed pins."""
    rc_cache = {name: wire_rc_per_um(stack.layer(name), stack)
                for name in ("M2", "M3", "M4", "M5", "M6")}
    via_r = {name: via_resistance(stack.layer(name), stack) for name in _VIA_LADDER}
    short_um = cgp_nm * 1e-3 * 20.0
    mid_um = cgp_nm * 1e-3 * 100.0
    nets = {}
    for net, driver in netlist.driver.items():
        endpoints = [_position_of(placement, netlist, driver)]
        for sink in netlist.sinks.get(net, []):
            endpoints.append(_position_of(placement, netlist, sink))
        xs = [p[0] for p in endpoints]
        ys = [p[1] for p in endpoints]
        dx = max(xs) - min(xs)
        dy = max(ys) - min(ys)
        length = dx + dy
        if length <= short_um:
            layer = "M2" if dx >= dy else "M3"
        elif length <= mid_um:
            layer = "M4" if dx >= dy else "M5"
        else:
            layer = "M6"
        hops = _LAYER_HOPS[layer]
        r_per, c_per = rc_cache[layer]
        r_vias = 2.0 * sum(via_r[_VIA_LADDER[k]] for k in range(hops))
        nets[net] = RoutedNet(name=net, length_um=length, layer=layer,
                              n_vias=2 * hops, r_wire_ohm=r_per * length,
                              c_wire_fF=c_per * length, r_via_ohm=r_vias)
    return RoutedDesign(netlist=netlist, placement=placement, stack=stack,
                        nets=nets, cgp_nm=cgp_nm)


def _design_view(routed: RoutedDesign, library, cfg: FlowConfig) -> Design:
    nl = routed.netlist
    gates = {gid: g.cell for gid, g in nl.gates.items()}
    gate_pins = {gid: (g.inputs, g.output) for gid, g in nl.gates.items()}
    nets = {name: replace(rn) for name, rn in routed.nets.items()}
    return Design(gates=gates, gate_pins=gate_pins, regs=dict(nl.regs),
                  pins=list(nl.pins), driver=dict(nl.driver),
                  sinks={k: list(v) for k, v in nl.sinks.items()},
                  nets=nets, io_cap_fF=cfg.io_cap_fF)


def _cell_area(design: Design, library) -> float:
    area = sum(library.cell(c).area_um2 for c in design.gates.values())
    area += len(design.regs) * library.cell("DFF").area_um2
    return area


def _segment_rc(stack: TechStack, layer: str, length: float):
    r_per, c_per = wire_rc_per_um(stack.layer(layer), stack)
    return r_per * length, c_per * length


def _insert_buffers(design: Design, stack: TechStack, library, net_name: str,
                    count: int, cfg: FlowConfig) -> None:
    """Split a net into count+1 equal segments joined by buffers."""
    rn = design.nets[net_name]
    seg_len = rn.length_um / (count + 1)
    sinks = design.sinks.pop(net_name)
    r_seg, c_seg = _segment_rc(stack, rn.layer, seg_len)
    prev_net = net_name
    design.nets[net_name] = replace(rn, length_um=seg_len, r_wire_ohm=r_seg,
                                    c_wire_fF=c_seg, c_pins_fF=0.0)
    for k in range(count):
        bid = f"@buf{design.buffer_count}"
        design.buffer_count += 1
        new_net = f"{net_name}@{k}"
        design.gates[bid] = cfg.buffer_cell
        design.gate_pins[bid] = ((prev_net,), new_net)
        design.sinks[prev_net] = [("gate", bid, 0)]
        design.driver[new_net] = ("gate", bid)
        design.nets[new_net] = RoutedNet(name=new_net, length_um=seg_len,
                                         layer=rn.layer, n_vias=2,
                                         r_wire_ohm=r_seg, c_wire_fF=c_seg,
                                         r_via_ohm=rn.r_via_ohm)
        prev_net = new_net
    design.sinks[prev_net] = sinks


def _remove_buffers(design: Design, net_name: str, count: int, original: RoutedNet) -> None:
    last = f"{net_name}@{count - 1}"
    sinks = design.sinks.pop(last)
    for k in range(count):
        design.buffer_count -= 1
        bid = f"@buf{design.buffer_count}"
        new_net = f"{net_name}@{count - 1 - k}"
        del design.gates[bid]
        del design.gate_pins[bid]
        del design.driver[new_net]
        del design.nets[new_net]
        design.sinks.pop(new_net, None)
    design.nets[net_name] = original
    design.sinks[net_name] = sinks


def _buffer_spacing_um(library, stack: TechStack, layer: str, cfg: FlowConfig) -> float:
    """Optimal repeater spacing sqrt(2 R_buf C_buf / (r_w c_w))."""
    buf = library.cell(cfg.buffer_cell)
    tab = buf.arc("A", "fall")
    l0, l1 = tab.loads_fF[1], tab.loads_fF[3]
    s = tab.slews_ps[1]
    r_buf_kohm = (tab.delay(s, l1) - tab.delay(s, l0)) / (l1 - l0)
    c_buf = buf.pin_caps_fF["A"]
    r_w, c_w = wire_rc_per_um(stack.layer(layer), stack)
    r_w *= 1e-3  # kOhm/um
    denom = r_w * c_w
    if denom <= 0:
        return float("inf")
    return math.sqrt(2.0 * max(r_buf_kohm, 1e-6) * c_buf / denom)


def optimize(routed: RoutedDesign, library, f_tar: float, cfg: FlowConfig | None = None) -> OptimizedDesign:
    """Buffer insertion + gate sizing until slack is met or progress stalls."""
    cfg = cfg or FlowConfig()
    design = _design_view(routed, library, cfg)
    stack = routed.stack
    die_area = routed.placement.floorplan.area_um2
    spacing = {layer: _buffer_spacing_um(library, stack, layer, cfg)
               for layer in ("M2", "M3", "M4", "M5", "M6")}

    unc_ns = cfg.clock_uncertainty_frac / f_tar
    rep = sta(design, library, f_tar, unc_ns)
    stall = 0
    rounds = 0
    while rounds < cfg.max_rounds:
        rounds += 1
        if rep.t_slack_ns >= 0:
            break
        round_start_tcp = rep.t_cp_ps
        area_now = _cell_area(design, library)

        # --- buffer batch on wire-delay-dominated critical nets; the wire
        # cost counts both the Elmore delay and the driver-delay increase
        # from carrying the wire capacitance (table difference, exact)
        crit_nets = [e[5] for e in rep.critical_path if e[5]]
        n_stages = max(sum(1 for e in rep.critical_path if e[0] == "gate"), 1)
        avg_stage = rep.t_cp_ps / n_stages
        inserted = []
        for net in crit_nets:
            rn = design.nets.get(net)
            if rn is None or net not in rep.net_wire_delay_ps:
                continue
            cost = rep.net_wire_delay_ps[net]
            drv = design.driver[net]
            load = rep.net_load_fF.get(net, 0.0)
            if rn.c_wire_fF > 0 and drv[0] in ("gate", "reg"):
                if drv[0] == "gate":
                    cell = library.cell(design.gates[drv[1]])
                    pin, slew = cell.input_pins[0], rep.gate_slew_in.get(drv[1], library.nominal_slew_ps)
                else:
                    cell, pin, slew = library.cell("DFF"), "CK", library.nominal_slew_ps
                tab = cell.arc(pin, "fall")
                cost += tab.delay(slew, load) - tab.delay(slew, load - rn.c_wire_fF)
            if cost > cfg.buffer_wire_delay_ratio * avg_stage:
                # the repeater spacing sets how many; even one buffer pays
                # when the net is capacitance-dominated
                l_opt = spacing[rn.layer]
                count = min(max(int(rn.length_um / l_opt), 1), cfg.max_buffers_per_net)
                if area_now + count * library.cell(cfg.buffer_cell).area_um2 > cfg.util_max * die_area:
                    continue
                original = replace(rn)
                _insert_buffers(design, stack, library, net, count, cfg)
                inserted.append((net, count, original))
                area_now += count * library.cell(cfg.buffer_cell).area_um2
        if inserted:
            trial = sta(design, library, f_tar, unc_ns)
            if trial.t_cp_ps < rep.t_cp_ps:
                rep = trial
            else:
                for net, count, original in reversed(inserted):
                    _remove_buffers(design, net, count, original)
                rep = sta(design, library, f_tar, unc_ns)

        # --- sizing batch along the worst path
        upsized = []
        for entry in rep.critical_path:
            if entry[0] != "gate":
                continue
            gid = entry[1]
            nxt = library.size_up(design.gates[gid])
            if nxt is None:
                continue
            delta = library.cell(nxt).area_um2 - library.cell(design.gates[gid]).area_um2
            if area_now + delta > cfg.util_max * die_area:
                continue
            upsized.append((gid, design.gates[gid]))
            design.gates[gid] = nxt
            area_now += delta
        if upsized:
            trial = sta(design, library, f_tar, unc_ns)
            if trial.t_cp_ps < rep.t_cp_ps:
                rep = trial
            else:
                # fall back to the single most loaded gate on the path
                for gid, old in reversed(upsized):
                    design.gates[gid] = old
                gid0, old0 = upsized[0]
                nxt = library.size_up(old0)
                design.gates[gid0] = nxt
                trial = sta(design, library, f_tar, unc_ns)
                if trial.t_cp_ps < rep.t_cp_ps:
                    rep = trial
                else:
                    design.gates[gid0] = old0
                    rep = sta(design, library, f_tar, unc_ns)

        if rep.t_cp_ps < round_start_tcp - 1e-9:
            stall = 0
        else:
            stall += 1
            if stall >= cfg.no_improve_rounds:
                break
    return OptimizedDesign(design=design, report=rep, placement=routed.placement,
                           stack=stack, rounds=rounds,
                           cell_area_um2=_cell_area(design, library))


def power_area(opt: OptimizedDesign, library, v_dd: float, f_ach_ghz: float,
               activity: float):
    """Dynamic + internal + leakage power (mW) and derived energy (pJ/cycle)."""
    design = opt.design
    rep = opt.report
    v2 = v_dd * v_dd
    p_net_uw = 0.0
    for net, load in rep.net_load_fF.items():
        p_net_uw += load * v2
    p_net_uw *= activity * f_ach_ghz

    p_int_uw = 0.0
    s0 = library.nominal_slew_ps
    for gid, cellname in design.gates.items():
        cell = library.cell(cellname)
        slew = rep.gate_slew_in.get(gid, s0)
        load = rep.net_load_fF.get(design.gate_output(gid), 0.0)
        pin = cell.input_pins[0]
        e_avg = 0.5 * (cell.arc(pin, "rise").energy(slew, load)
                       + cell.arc(pin, "fall").energy(slew, load))
        p_int_uw += activity * f_ach_ghz * e_avg
    dff = library.cell("DFF")
    for rid, r in design.regs.items():
        load = rep.net_load_fF.get(r.q, 0.0)
        e_clk = 0.5 * (dff.arc("CK", "rise").energy(s0, load)
                       + dff.arc("CK", "fall").energy(s0, load))
        p_int_uw += f_ach_ghz * e_clk  # clock toggles every cycle

    p_leak_uw = sum(library.cell(c).leakage_nW for c in design.gates.values()) * 1e-3
    p_leak_uw += len(design.regs) * dff.leakage_nW * 1e-3

    power_mw = (p_net_uw + p_int_uw + p_leak_uw) * 1e-3
    energy_pj = power_mw / f_ach_ghz
    return power_mw, energy_pj


def _critical_path_delay(opt: OptimizedDesign, library, zero_r: bool,
                         zero_c: bool) -> float:
    """Delay of the reported critical path with its interconnect R and/or C
    zeroed along the path. Input slews are held at their reported values;
    loads and wire delays are re-evaluated, so the unmodified evaluation
    reproduces t_CP exactly.
    """
    design = opt.design
    rep = opt.report
    total = 0.0
    for entry in rep.critical_path:
        kind, who, cell_name, _, _, via_net = entry
        rn = design.nets.get(via_net) if via_net else None
        mod = None
        if rn is not None:
            mod = replace(rn,
                          r_wire_ohm=0.0 if zero_r else rn.r_wire_ohm,
                          r_via_ohm=0.0 if zero_r else rn.r_via_ohm,
                          c_wire_fF=0.0 if zero_c else rn.c_wire_fF)
        if kind in ("reg", "pin") and via_net == "":
            # launch element: clk->q at its (possibly lightened) output load
            if kind == "pin":
                continue
            qnet = design.regs[who].q
            qrn = design.nets.get(qnet)
            load = rep.net_load_fF.get(qnet, 0.0)
            if zero_c and qrn is not None:
                load -= qrn.c_wire_fF
            dff = library.cell("DFF")
            s0 = library.nominal_slew_ps
            total += max(dff.arc("CK", "rise").delay(s0, load),
                         dff.arc("CK", "fall").delay(s0, load))
        elif kind == "gate":
            slew = rep.gate_slew_in.get(who, library.nominal_slew_ps)
            out_net = design.gate_output(who)
            orn = design.nets.get(out_net)
            load = rep.net_load_fF.get(out_net, 0.0)
            if zero_c and orn is not None:
                load -= orn.c_wire_fF
            cell = library.cell(design.gates[who])
            pin = cell.input_pins[0]
            total += max(cell.arc(pin, "rise").delay(slew, load),
                         cell.arc(pin, "fall").delay(slew, load))
            if mod is not None:
                total += wire_delay_ps(mod)
        else:
            # capture element: wire into the endpoint (+ setup for a reg)
            if mod is not None:
                total += wire_delay_ps(mod)
            if kind == "reg":
                total += library.cell("DFF").setup_ps
    return total


def rc_contribution(opt: OptimizedDesign, library, f_tar: float):
    """Critical-path delay shares of interconnect R and C.

    Re-evaluates the critical path's own extracted netlist with wire+via
    resistance (then wire capacitance) zeroed; share = 1 - t_CP'/t_CP.
    """
    base = _critical_path_delay(opt, library, zero_r=False, zero_c=False)
    if base <= 0:
        return 0.0, 0.0
    t_r0 = _critical_path_delay(opt, library, zero_r=True, zero_c=False)
    t_c0 = _critical_path_delay(opt, library, zero_r=False, zero_c=True)
    share_r = max(0.0, 1.0 - t_r0 / base)
    share_c = max(0.0, 1.0 - t_c0 / base)
    return share_r, share_c


def _layer_stats(opt: OptimizedDesign, top_k: int = 20):
    """Average net length per layer, overall and on the top-K endpoint paths."""
    lengths = {}
    for rn in opt.design.nets.values():
        lengths.setdefault(rn.layer, []).append(rn.length_um)
    overall = {layer: sum(v) / len(v) for layer, v in sorted(lengths.items())}
    crit = {}
    crit_nets = [e[5] for e in opt.report.critical_path if e[5] and e[5] in opt.design.nets]
    for net in crit_nets[:top_k]:
        rn = opt.design.nets[net]
        crit.setdefault(rn.layer, []).append(rn.length_um)
    crit_avg = {layer: sum(v) / len(v) for layer, v in sorted(crit.items())}
    return {"avg_len_um": overall, "critical_avg_len_um": crit_avg}


def _flow_hash(netlist_hash: str, lib_id: str, stack: TechStack, f_tar: float,
               v_dd: float, cfg: FlowConfig, floorplan: Floorplan) -> str:
    blob = repr((netlist_hash, lib_id, stack, f_tar, v_dd, cfg,
                 round(floorplan.width_um, 6), round(floorplan.height_um, 6))).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def run_flow(netlist: Netlist, library, stack: TechStack, f_tar: float,
             cfg: FlowConfig | None = None, floorplan: Floorplan | None = None,
             return_design: bool = False):
    """Place, route, optimize and report one implementation point."""
    cfg = cfg or FlowConfig()
    if floorplan is None:
        base_area = (sum(library.cell(g.cell).area_um2 for g in netlist.gates.values())
                     + len(netlist.regs) * library.cell("DFF").area_um2)
        floorplan = make_floorplan(base_area, cfg.utilization, cfg.aspect,
                                   library.cell("INV_X1").geometry.height_nm * 1e-3)
    placement = place(netlist, floorplan, library, seed=cfg.seed,
                      moves_per_cell=cfg.moves_per_cell)
    routed = route_estimate(placement, stack, netlist, library.dims.cgp)
    opt = optimize(routed, library, f_tar, cfg)
    rep = sta(opt.design, library, f_tar,
              cfg.clock_uncertainty_frac / f_tar)
    opt.report = rep
    f_achieved = f_ach(f_tar, rep.t_slack_ns)
    power_mw, energy_pj = power_area(opt, library, library.v_dd, f_achieved, cfg.activity)
    share_r, share_c = rc_contribution(opt, library, f_tar)
    lengths = [rn.length_um for rn in opt.design.nets.values()]
    h = _flow_hash(netlist.hash(), library.lib_id, stack, f_tar, library.v_dd,
                   cfg, floorplan)
    result = DesignResult(
        config_hash=h, v_dd_V=library.v_dd, f_tar_GHz=f_tar, f_ach_GHz=f_achieved,
        t_slack_ns=rep.t_slack_ns, energy_pJ=energy_pj, power_mW=power_mw,
        cell_area_um2=opt.cell_area_um2, die_area_um2=floorplan.area_um2,
        buffer_count=opt.design.buffer_count,
        avg_net_len_um=sum(lengths) / len(lengths), shareR=share_r, shareC=share_c,
        critical_path=rep.critical_path, layer_stats=_layer_stats(opt),
        lib_id=library.lib_id, netlist_hash=netlist.hash())
    return (result, opt) if return_design else result
