"""Static timing analysis: table-lookup cell delays plus Elmore wire delays.

Slews are propagated topologically as a pure function of the netlist (each
gate's output slew comes from its worst input slew and output load), after
which per-(gate, pin) delays are fixed numbers and the critical path is a
longest-path DP over the register-to-register graph. Cell delays take the
worse of the rise/fall tables. The identical annotate/DP arithmetic is
exposed so an exhaustive path enumeration reproduces t_CP bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import SchemaError


@dataclass
class TimingReport:
    t_cp_ps: float
    period_ns: float
    uncertainty_ns: float
    t_slack_ns: float
    endpoint: tuple
    critical_path: list        # [(kind, id, cell, incr_ps, arrival_ps, via_net)]
    arrival_ps: dict           # gate/reg id -> output arrival
    gate_delay_ps: dict        # (gate id, pin idx) -> fixed delay
    launch_ps: dict            # reg/pin id -> launch arrival at output
    net_wire_delay_ps: dict
    net_load_fF: dict
    slew_ps: dict              # driver id -> output slew
    gate_slew_in: dict         # gate id -> worst input slew
    levels: list               # topological order of gate ids


def wire_delay_ps(net) -> float:
    """Elmore delay of the net's 3-segment pi model plus its vias.

    Half the via resistance sits at each end; the wire sees 2/3 of its own
    capacitance plus the full sink load downstream.
    """
    r_w = net.r_wire_ohm * 1e-3
    r_v = 0.5 * net.r_via_ohm * 1e-3
    c_w = net.c_wire_fF
    c_p = net.c_pins_fF
    return r_v * (c_w + c_p) + r_w * (2.0 / 3.0 * c_w + c_p) + r_v * c_p


def _pin_cap(design, library, sink) -> float:
    kind, who, idx = sink
    if kind == "pin":
        return design.io_cap_fF
    if kind == "reg":
        return library.cell("DFF").pin_caps_fF["D"]
    cell = library.cell(design.gates[who])
    pin = cell.input_pins[idx]
    return cell.pin_caps_fF[pin]


def annotate_timing(design, library) -> TimingReport:
    """Compute loads, slews, per-arc delays and the critical path."""
    gates = design.gates
    regs = design.regs
    driver = design.driver
    sinks = design.sinks

    # levelize gates (registers break the graph)
    indeg = {gid: 0 for gid in gates}
    fanout_gates = {gid: [] for gid in gates}
    for gid in gates:
        for net in design.gate_inputs(gid):
            d = driver[net]
            if d[0] == "gate":
                indeg[gid] += 1
                fanout_gates[d[1]].append(gid)
    from collections import deque
    ready = deque(sorted(g for g, k in indeg.items() if k == 0))
    levels = []
    while ready:
        gid = ready.popleft()
        levels.append(gid)
        for nxt in fanout_gates[gid]:
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                ready.append(nxt)
    if len(levels) != len(gates):
        raise SchemaError("combinational cycle in netlist")

    # loads and wire delays
    net_load = {}
    net_wire = {}
    for net, rn in design.nets.items():
        c_pins = 0.0
        for sink in sinks.get(net, []):
            c_pins += _pin_cap(design, library, sink)
        rn.c_pins_fF = c_pins
        net_load[net] = rn.c_wire_fF + c_pins
        net_wire[net] = wire_delay_ps(rn)

    s0 = library.nominal_slew_ps
    dff = library.cell("DFF")
    slew = {}
    launch = {}
    for p in design.pins:
        if p.direction == "in":
            slew[("pin", p.name)] = s0
            launch[("pin", p.name)] = 0.0
    for rid, r in regs.items():
        tab = dff.arc("CK", "rise")
        tabf = dff.arc("CK", "fall")
        load = net_load.get(r.q, 0.0)
        d_r = tab.delay(s0, load)
        d_f = tabf.delay(s0, load)
        if d_f > d_r:
            launch[("reg", rid)] = d_f
            slew[("reg", rid)] = tabf.out_slew(s0, load)
        else:
            launch[("reg", rid)] = d_r
            slew[("reg", rid)] = tab.out_slew(s0, load)

    # topological slew + fixed per-(gate, pin) delay
    gate_delay = {}
    gate_slew_in = {}
    out_slew = {}
    for gid in levels:
        cell = library.cell(gates[gid])
        out_net = design.gate_output(gid)
        load = net_load.get(out_net, 0.0)
        worst_in = 0.0
        for idx, net in enumerate(design.gate_inputs(gid)):
            d = driver[net]
            s_in = out_slew.get(d[1], None) if d[0] == "gate" else slew.get(d, s0)
            if s_in is None:
                s_in = s0
            worst_in = max(worst_in, s_in)
        gate_slew_in[gid] = worst_in
        best = None
        for idx, net in enumerate(design.gate_inputs(gid)):
            pin = cell.input_pins[idx]
            d_r = cell.arc(pin, "rise").delay(worst_in, load)
            d_f = cell.arc(pin, "fall").delay(worst_in, load)
            gate_delay[(gid, idx)] = max(d_r, d_f)
            if best is None or gate_delay[(gid, idx)] > best[0]:
                direction = "rise" if d_r >= d_f else "fall"
                best = (gate_delay[(gid, idx)], pin, direction)
        out_slew[gid] = cell.arc(best[1], best[2]).out_slew(worst_in, load)

    # arrival DP
    arrival = {}
    pred = {}
    for gid in levels:
        best_t = None
        best_pred = None
        for idx, net in enumerate(design.gate_inputs(gid)):
            d = driver[net]
            if d[0] == "gate":
                base = arrival[d[1]]
            else:
                base = launch[d]
            at_pin = base + net_wire[net]
            t = at_pin + gate_delay[(gid, idx)]
            if best_t is None or t > best_t:
                best_t = t
                best_pred = (d, net, idx)
        arrival[gid] = best_t if best_t is not None else 0.0
        pred[gid] = best_pred

    # endpoints: register D pins (plus setup) and primary outputs
    t_cp = None
    end = None
    setup = dff.setup_ps
    for rid, r in regs.items():
        d = driver.get(r.d)
        if d is None:
            continue
        base = arrival[d[1]] if d[0] == "gate" else launch[d]
        t = base + net_wire[r.d] + setup
        if t_cp is None or t > t_cp:
            t_cp = t
            end = ("reg", rid, r.d, d)
    for p in design.pins:
        if p.direction != "out":
            continue
        d = driver.get(p.net)
        if d is None:
            continue
        base = arrival[d[1]] if d[0] == "gate" else launch[d]
        t = base + net_wire[p.net]
        if t_cp is None or t > t_cp:
            t_cp = t
            end = ("pin", p.name, p.net, d)
    if t_cp is None:
        raise SchemaError("no timing endpoints in design")

    # backtrack the critical path
    path = []
    kind, who, via_net, d = end
    path.append((kind, who, "DFF" if kind == "reg" else "-", net_wire[via_net], t_cp, via_net))
    while d[0] == "gate":
        gid = d[1]
        p = pred[gid]
        path.append(("gate", gid, design.gates[gid],
                     gate_delay[(gid, p[2])] if p else 0.0, arrival[gid],
                     p[1] if p else ""))
        if p is None:
            break
        d = p[0]
    path.append((d[0], d[1], "DFF" if d[0] == "reg" else "-", launch.get(d, 0.0),
                 launch.get(d, 0.0), ""))
    path.reverse()

    return TimingReport(
        t_cp_ps=t_cp, period_ns=0.0, uncertainty_ns=0.0, t_slack_ns=0.0,
        endpoint=end, critical_path=path, arrival_ps=arrival,
        gate_delay_ps=gate_delay, launch_ps=launch,
        net_wire_delay_ps=net_wire, net_load_fF=net_load,
        slew_ps=out_slew, gate_slew_in=gate_slew_in, levels=levels)


def sta(design, library, f_tar_ghz: float, clock_uncertainty_ns: float | None = None) -> TimingReport:
    """Timing report at a target clock: slack = period - uncertainty - t_CP."""
    rep = annotate_timing(design, library)
    period_ns = 1.0 / f_tar_ghz
    unc = 0.05 * period_ns if clock_uncertainty_ns is None else clock_uncertainty_ns
    rep.period_ns = period_ns
    rep.uncertainty_ns = unc
    rep.t_slack_ns = period_ns - unc - rep.t_cp_ps * 1e-3
    return rep
