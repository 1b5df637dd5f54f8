"""Timing/power characterization of parametric cells.

Each arc is simulated as a transient over a lumped two-node model: the
pull-up and pull-down networks (reduced to single equivalent devices,
series stacks dividing the drive width) switch an internal node that
connects to the output pin through the MEOL series resistance; half of the
MEOL capacitance sits on each node. The input is a saturated ramp whose
10-90 transition equals the requested slew.

The link between the two nodes is far stiffer than the device dynamics
(R*C of the link is well under the step size), so an explicit integrator
is unusable. Each step instead linearizes the device currents around the
current state (current + conductance) and advances the resulting 2x2
linear system exactly with its matrix exponential (an exponential
Rosenbrock step): unconditionally stable, exact for the RC part, and
second-order accurate in the device nonlinearity at the step sizes used.

Delay is measured 50%-to-50%, output slew 10%-to-90%, and the switching
energy is the integral of the supply-rail current times V_DD over the
event. Tables are gridded 5x5 in (input slew x output load); the delay
grid is conditioned to be non-decreasing along the slew axis (pessimistic
envelope), which downstream timing relies on.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import asdict, dataclass, replace

import numpy as np

from ..errors import CharacterizationError, FeatureError, ParameterError, SchemaError
from ..interconnect import TechStack, save_itf
from ..vsdevice import VSParams, drain_current, gate_cap_per_width
from .geometry import (CANONICAL_GATES, DRIVE_SIZES, CellDims, CellGeometry,
                       CellTemplate, GATE_TEMPLATES, extract_meol, scale_layout)

DT_PS = 0.5
SLEW_KNOTS = (0.4, 1.0, 3.0, 9.0, 27.0)
LOAD_KNOTS = (0.5, 2.0, 8.0, 24.0, 64.0)

_PIN_NAMES = {1: ("A",), 2: ("A", "B"), 3: ("A", "B", "C")}


@dataclass(frozen=True)
class ElecModel:
    """Reduced electrical view of a cell used by the transient engine."""

    w_pu_um: float       # effective pull-up drive width
    w_pd_um: float       # effective pull-down drive width
    c_int_fF: float      # cap on the device-side node
    c_out_fF: float      # fixed cap on the pin-side node (before load)
    r_meol_kohm: float   # series MEOL resistance
    pin_cap_fF: float    # input capacitance per pin
    w_n_total_um: float
    w_p_total_um: float


@dataclass(frozen=True)
class ArcTable:
    slews_ps: tuple
    loads_fF: tuple
    delay_ps: tuple       # rows: slew, cols: load
    out_slew_ps: tuple
    energy_fJ: tuple

    def _axis_interp(self, knots, x):
        n = len(knots)
        i = 0
        while i + 2 < n and knots[i + 1] <= x:
            i += 1
        x0, x1 = knots[i], knots[i + 1]
        t = (x - x0) / (x1 - x0)
        return i, t

    def _lookup(self, grid, slew, load):
        i, ts = self._axis_interp(self.slews_ps, slew)
        j, tl = self._axis_interp(self.loads_fF, load)
        g00 = grid[i][j]
        g01 = grid[i][j + 1]
        g10 = grid[i + 1][j]
        g11 = grid[i + 1][j + 1]
        a = g00 + (g01 - g00) * tl
        b = g10 + (g11 - g10) * tl
        return a + (b - a) * ts

    def delay(self, slew, load):
        """Bilinear interpolation; linear extrapolation beyond the grid."""
        return self._lookup(self.delay_ps, slew, load)

    def out_slew(self, slew, load):
        return self._lookup(self.out_slew_ps, slew, load)

    def energy(self, slew, load):
        return self._lookup(self.energy_fJ, slew, load)


@dataclass(frozen=True)
class CharTable:
    """Characterized view of one cell: arc grids, pin caps, leakage, drive."""

    name: str
    geometry: CellGeometry
    inverting: bool
    input_pins: tuple
    arcs: dict  # (pin, "rise"|"fall") -> ArcTable; direction is the OUTPUT edge
    pin_caps_fF: dict
    leakage_nW: float
    i_on_up_uA: float
    i_on_down_uA: float
    elec: ElecModel
    setup_ps: float = 0.0  # sequential cells only

    @property
    def area_um2(self) -> float:
        return self.geometry.area_um2

    def arc(self, pin, direction) -> ArcTable:
        return self.arcs[(pin, direction)]

    def worst_delay(self, slew, load):
        return max(t.delay(slew, load) for t in self.arcs.values())


def _device_fn(p: VSParams):
    """Fast normalized-bias evaluator returning uA/um for array biases."""
    nphi = p.n_body * p.phi_t
    vt0, dibl, beta, vinj, vdsat = p.v_t0, p.dibl, p.beta, p.v, p.v_dsat
    c = p.c_inv * 1e-6

    def f(vgs, vds):
        sgn = np.sign(vds)
        avds = np.abs(vds)
        eta = (vgs - vt0 + dibl * avds) / nphi
        sp = np.maximum(eta, 0.0) + np.log1p(np.exp(-np.abs(eta)))
        x = avds / vdsat
        fsat = x / (1.0 + x**beta) ** (1.0 / beta)
        return 100.0 * c * nphi * sp * vinj * fsat * sgn

    return f


def simulate_arc(vs_n: VSParams, vs_p: VSParams, elec: ElecModel, v_dd: float,
                 slews_ps, loads_fF, out_rising: bool, dt_ps: float = DT_PS,
                 arc_id: str = "?", t_max_ps: float = 50000.0):
    """Vectorized transient over paired (slew, load) arrays.

    Returns (delay_ps, out_slew_ps, energy_fJ) arrays. Both networks conduct
    during the input ramp, so short-circuit energy is included.
    """
    slews = np.asarray(slews_ps, dtype=float)
    loads = np.asarray(loads_fF, dtype=float)
    n = slews.shape[0]
    fn = _device_fn(vs_n)
    fp = _device_fn(vs_p)

    t_ramp = slews / 0.8  # 10-90 slew -> full 0-100 ramp time
    c_i = max(elec.c_int_fF, 1e-4)
    c_o = np.maximum(elec.c_out_fF + loads, 1e-4)
    r = max(elec.r_meol_kohm, 1e-9)
    c_t_node = c_i + c_o

    v0 = 0.0 if out_rising else v_dd
    v_i = np.full(n, v0)
    v_o = np.full(n, v0)
    thresholds = (0.1, 0.5, 0.9) if out_rising else (0.9, 0.5, 0.1)
    levels = np.array(thresholds).reshape(3, 1) * v_dd
    cross = np.full((3, n), np.nan)
    energy = np.zeros(n)

    def vin_at(t):
        if out_rising:  # input falls
            return v_dd * np.clip(1.0 - t / t_ramp, 0.0, 1.0)
        return v_dd * np.clip(t / t_ramp, 0.0, 1.0)

    w_pu_mA = elec.w_pu_um * 1e-3
    w_pd_mA = elec.w_pd_um * 1e-3

    def device_current_pair(t, vi):
        """(net current, supply current, conductance) at state vi, time t."""
        vin = vin_at(t)
        vin2 = np.concatenate((vin, vin))
        vi2 = np.concatenate((vi, vi + delta_v))
        i_p = w_pu_mA * fp(v_dd - vin2, v_dd - vi2)
        i_n = w_pd_mA * fn(vin2, vi2)
        i_net = i_p - i_n
        g = np.maximum((i_net[:n] - i_net[n:]) / delta_v, 0.0)
        return i_net[:n], i_p[:n], g

    def phi1(x):
        # (e^x - 1)/x, stable near 0
        small = np.abs(x) < 1e-8
        return np.where(small, 1.0 + x / 2.0, np.expm1(x) / np.where(small, 1.0, x))

    a12 = 1.0 / (r * c_i)
    a21 = 1.0 / (r * c_o)
    a22 = -a21
    delta_v = 1e-3
    ramp_cap = t_ramp / 24.0  # resolve the input ramp before the onset
    tail_cap = 4.0 * dt_ps
    target_dv = 0.015 * v_dd  # step controller: per-step state change target

    t = 0.0
    dt = min(dt_ps, float(np.min(ramp_cap)))
    prev_vo = v_o.copy()
    prev_vi = v_i.copy()
    settle = 0.99 * v_dd if out_rising else 0.01 * v_dd
    settled = np.zeros(n, dtype=bool)
    max_steps = 400000
    for _ in range(max_steps):
        if t >= t_max_ps:
            break
        t_mid = t + dt / 2.0
        i0, ip0, g = device_current_pair(t_mid, v_i)
        # linearized system dv/dt = A v + b, advanced exactly over dt
        a11 = -(g + 1.0 / r) / c_i
        b1 = (i0 + g * v_i) / c_i
        tr = a11 + a22
        det = a11 * a22 - a12 * a21
        disc = np.sqrt(np.maximum(tr * tr / 4.0 - det, 1e-24))
        l1 = tr / 2.0 + disc
        l2 = tr / 2.0 - disc
        denom = l1 - l2
        # projector P1 = (A - l2 I)/(l1 - l2); P2 = I - P1
        p1_11 = (a11 - l2) / denom
        p1_12 = a12 / denom
        p1_21 = a21 / denom
        p1_22 = (a22 - l2) / denom
        e1 = np.exp(l1 * dt)
        e2 = np.exp(l2 * dt)
        f1 = phi1(l1 * dt) * dt
        f2 = phi1(l2 * dt) * dt
        # v_new = E v + Phi b, assembled from the two spectral projectors
        ev_i = (e1 * p1_11 + e2 * (1.0 - p1_11)) * v_i + (e1 - e2) * p1_12 * v_o
        ev_o = (e1 - e2) * p1_21 * v_i + (e1 * p1_22 + e2 * (1.0 - p1_22)) * v_o
        v_i = ev_i + (f1 * p1_11 + f2 * (1.0 - p1_11)) * b1
        v_o = ev_o + (f1 - f2) * p1_21 * b1
        np.clip(v_i, -0.5, v_dd + 0.5, out=v_i)
        np.clip(v_o, -0.5, v_dd + 0.5, out=v_o)
        t += dt
        energy += ip0 * v_dd * dt  # fJ, midpoint rule
        if out_rising:
            hit = np.isnan(cross) & (prev_vo < levels) & (v_o >= levels)
        else:
            hit = np.isnan(cross) & (prev_vo > levels) & (v_o <= levels)
        if hit.any():
            rows, cols = np.nonzero(hit)
            dv = v_o[cols] - prev_vo[cols]
            lev = levels[rows, 0]
            frac_step = np.where(dv != 0, (lev - prev_vo[cols]) / np.where(dv != 0, dv, 1.0), 1.0)
            cross[rows, cols] = t - dt + frac_step * dt
        settled = (v_o >= settle) if out_rising else (v_o <= settle)
        if np.all(settled) and not np.any(np.isnan(cross)) and t > np.max(t_ramp):
            break
        # step controller: the exponential step is exact for frozen device
        # state, so accuracy is set by how much the state moved; grow/shrink
        # toward the target move, capped by ramp resolution pre-onset
        moved = np.where(settled, 0.0,
                         np.maximum(np.abs(v_o - prev_vo), np.abs(v_i - prev_vi)))
        dv_max = float(np.max(moved))
        ratio = target_dv / dv_max if dv_max > 0 else 2.0
        ceiling = float(np.min(np.where(settled | (t >= t_ramp), tail_cap, ramp_cap)))
        dt = dt * min(2.0, max(0.4, ratio))
        dt = max(min(dt, ceiling, tail_cap), 2e-3)
        prev_vo = v_o.copy()
        prev_vi = v_i.copy()
    else:
        raise CharacterizationError(arc_id, f"step budget exhausted (t={t:.1f} ps)")
    if t >= t_max_ps:
        raise CharacterizationError(arc_id, f"output did not settle within {t_max_ps} ps")
    if np.any(np.isnan(cross)):
        raise CharacterizationError(arc_id, "missing threshold crossing")

    t_in50 = 0.5 * t_ramp
    delay = cross[1] - t_in50
    out_slew = np.abs(cross[2] - cross[0])
    return delay, out_slew, energy


def _elec_model(geom: CellGeometry, template: CellTemplate, stack: TechStack,
                vs_n: VSParams, vs_p: VSParams, size: int) -> ElecModel:
    d = geom.dims
    meol = extract_meol(geom, stack)
    w_f = d.w_eff_per_finger_um()
    w_pu = w_f * size / template.pu_stack
    w_pd = w_f * size / template.pd_stack
    w_total = w_f * geom.n_fingers
    cgw = gate_cap_per_width(vs_n) * w_f + gate_cap_per_width(vs_p) * w_f
    # half the flank coupling loads the input pin, half the output node
    pin_cap = size * cgw + 0.5 * meol.c_g2c / template.n_inputs
    c_int = 0.5 * meol.c_g2c + 0.5 * meol.c_meol_other
    c_out = 0.5 * meol.c_meol_other
    r_kohm = (meol.r_con + meol.r_meol_series) * 1e-3
    return ElecModel(w_pu_um=w_pu, w_pd_um=w_pd, c_int_fF=c_int, c_out_fF=c_out,
                     r_meol_kohm=r_kohm, pin_cap_fF=pin_cap,
                     w_n_total_um=w_total, w_p_total_um=w_total)


def _monotone_slew_axis(grid):
    """Pessimistic conditioning: running max down each load column."""
    g = [list(row) for row in grid]
    for i in range(1, len(g)):
        for j in range(len(g[0])):
            if g[i][j] < g[i - 1][j]:
                g[i][j] = g[i - 1][j]
    return tuple(tuple(row) for row in g)


def _grid_sim(vs_n, vs_p, elec, v_dd, slew_axis, load_axis, out_rising, arc_id):
    ns, nl = len(slew_axis), len(load_axis)
    ss = np.repeat(slew_axis, nl)
    ll = np.tile(load_axis, ns)
    d, s, e = simulate_arc(vs_n, vs_p, elec, v_dd, ss, ll, out_rising, arc_id=arc_id)
    shape = (ns, nl)
    return (tuple(tuple(r) for r in d.reshape(shape).tolist()),
            tuple(tuple(r) for r in s.reshape(shape).tolist()),
            tuple(tuple(r) for r in e.reshape(shape).tolist()))


def _cascade_grid(vs_n, vs_p, first: ElecModel, second: ElecModel, v_dd,
                  slew_axis, load_axis, out_rising, arc_id):
    """Two-stage (inverter pair) table for BUF and the flop clk->q path."""
    s1 = np.asarray(slew_axis, dtype=float)
    l1 = np.full(len(s1), second.pin_cap_fF)
    d1, os1, e1 = simulate_arc(vs_n, vs_p, first, v_dd, s1, l1,
                               out_rising=not out_rising, arc_id=arc_id + "/s1")
    ns, nl = len(slew_axis), len(load_axis)
    ss2 = np.repeat(os1, nl)
    ll2 = np.tile(load_axis, ns)
    d2, os2, e2 = simulate_arc(vs_n, vs_p, second, v_dd, ss2, ll2,
                               out_rising=out_rising, arc_id=arc_id + "/s2")
    shape = (ns, nl)
    delay = d2.reshape(shape) + np.repeat(d1, nl).reshape(shape)
    energy = e2.reshape(shape) + np.repeat(e1, nl).reshape(shape)
    return (tuple(tuple(r) for r in delay.tolist()),
            tuple(tuple(r) for r in os2.reshape(shape).tolist()),
            tuple(tuple(r) for r in energy.tolist()))


def characterize(geom: CellGeometry, stack: TechStack, vs_n: VSParams,
                 vs_p: VSParams, v_dd: float) -> CharTable:
    """Build the full arc table set for one scaled cell."""
    base, _, size = geom.cell_name.partition("_X")
    size = int(size) if size else 1
    template = GATE_TEMPLATES[base]
    elec = _elec_model(geom, template, stack, vs_n, vs_p, size)

    # probe the natural output transition to anchor the grids
    probe_d, probe_s, _ = simulate_arc(
        vs_n, vs_p, elec, v_dd, np.array([2.0]), np.array([2.0 * elec.pin_cap_fF]),
        out_rising=False, arc_id=f"{geom.cell_name}/probe")
    s0 = max(float(probe_s[0]), 1.0)
    slew_axis = tuple(round(k * s0, 6) for k in SLEW_KNOTS)
    load_axis = tuple(round(k * elec.pin_cap_fF, 9) for k in LOAD_KNOTS)

    pins = _PIN_NAMES[template.n_inputs] if base != "DFF" else ("D", "CK")
    arcs = {}
    setup_ps = 0.0
    if base == "BUF":
        inv1 = _elec_model(scale_layout(GATE_TEMPLATES["INV"], geom.dims, 1),
                           GATE_TEMPLATES["INV"], stack, vs_n, vs_p, 1)
        for direction, rising in (("rise", True), ("fall", False)):
            grids = _cascade_grid(vs_n, vs_p, inv1, elec, v_dd, slew_axis, load_axis,
                                  rising, f"{geom.cell_name}/A:{direction}")
            arcs[("A", direction)] = ArcTable(slew_axis, load_axis,
                                              _monotone_slew_axis(grids[0]), grids[1], grids[2])
    elif base == "DFF":
        inv1 = _elec_model(scale_layout(GATE_TEMPLATES["INV"], geom.dims, 1),
                           GATE_TEMPLATES["INV"], stack, vs_n, vs_p, 1)
        for direction, rising in (("rise", True), ("fall", False)):
            grids = _cascade_grid(vs_n, vs_p, inv1, inv1, v_dd, slew_axis, load_axis,
                                  rising, f"{geom.cell_name}/CK:{direction}")
            arcs[("CK", direction)] = ArcTable(slew_axis, load_axis,
                                               _monotone_slew_axis(grids[0]), grids[1], grids[2])
        setup_ps = 2.0 * float(probe_d[0])
    else:
        for direction, rising in (("rise", True), ("fall", False)):
            grids = _grid_sim(vs_n, vs_p, elec, v_dd, slew_axis, load_axis, rising,
                              f"{geom.cell_name}:{direction}")
            table = ArcTable(slew_axis, load_axis,
                             _monotone_slew_axis(grids[0]), grids[1], grids[2])
            for pin in pins:
                arcs[(pin, direction)] = table

    i_off_n = drain_current(vs_n, 0.0, v_dd) * 1e3   # nA/um
    i_off_p = drain_current(vs_p, 0.0, -v_dd) * 1e3
    leakage = (i_off_n * elec.w_n_total_um + i_off_p * elec.w_p_total_um) * v_dd
    i_on_up = elec.w_pu_um * drain_current(vs_p, -v_dd, -v_dd)
    i_on_down = elec.w_pd_um * drain_current(vs_n, v_dd, v_dd)

    pin_caps = {pin: elec.pin_cap_fF for pin in pins}
    return CharTable(name=geom.cell_name, geometry=geom, inverting=template.inverting,
                     input_pins=tuple(pins), arcs=arcs, pin_caps_fF=pin_caps,
                     leakage_nW=leakage, i_on_up_uA=i_on_up, i_on_down_uA=i_on_down,
                     elec=elec, setup_ps=setup_ps)


@dataclass
class CellLibrary:
    cells: dict            # name -> CharTable
    v_dd: float
    dims: CellDims
    vs_n: VSParams
    vs_p: VSParams
    lib_id: str
    nominal_slew_ps: float

    def cell(self, name: str) -> CharTable:
        try:
            return self.cells[name]
        except KeyError:
            raise FeatureError(f"cell {name!r} not in library") from None

    def size_up(self, name: str):
        """Next cell in the drive ladder, or None at the top."""
        base, _, size = name.partition("_X")
        if not size:
            return None
        ladder = [s for s in DRIVE_SIZES]
        idx = ladder.index(int(size))
        if idx + 1 >= len(ladder):
            return None
        nxt = f"{base}_X{ladder[idx + 1]}"
        return nxt if nxt in self.cells else None


def library_id(dims: CellDims, stack: TechStack, vs_n: VSParams, vs_p: VSParams,
               v_dd: float) -> str:
    blob = repr((dims, vs_n, vs_p, v_dd, stack)).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def build_library(dims: CellDims, stack: TechStack, vs_n: VSParams,
                  vs_p: VSParams, v_dd: float) -> CellLibrary:
    """Scale, extract and characterize the full cell set.

    Gate set: the six canonical gates at X1/X2/X4/X8 plus BUF sizes and one
    flop. Geometry failures surface as DrcError naming the cell.
    """
    cells = {}
    for gate in CANONICAL_GATES + ("BUF",):
        for size in DRIVE_SIZES:
            geom = scale_layout(GATE_TEMPLATES[gate], dims, size)
            cells[geom.cell_name] = characterize(geom, stack, vs_n, vs_p, v_dd)
    geom = scale_layout(GATE_TEMPLATES["DFF"], dims, 1)
    cells[geom.cell_name] = characterize(geom, stack, vs_n, vs_p, v_dd)
    inv = cells["INV_X1"]
    nominal_slew = inv.arc("A", "fall").out_slew_ps[1][1]
    return CellLibrary(cells=cells, v_dd=v_dd, dims=dims, vs_n=vs_n, vs_p=vs_p,
                       lib_id=library_id(dims, stack, vs_n, vs_p, v_dd),
                       nominal_slew_ps=nominal_slew)


# --- library dump -----------------------------------------------------------

def save_library(lib: CellLibrary, outdir) -> None:
    os.makedirs(outdir, exist_ok=True)
    os.makedirs(os.path.join(outdir, "cells"), exist_ok=True)
    manifest = {
        "v_dd": lib.v_dd,
        "lib_id": lib.lib_id,
        "nominal_slew_ps": lib.nominal_slew_ps,
        "dims": asdict(lib.dims),
        "vs_n": asdict(lib.vs_n),
        "vs_p": asdict(lib.vs_p),
        "cells": {},
    }
    for name, ct in sorted(lib.cells.items()):
        manifest["cells"][name] = {
            "n_fingers": ct.geometry.n_fingers,
            "inverting": ct.inverting,
            "input_pins": list(ct.input_pins),
            "pin_caps_fF": ct.pin_caps_fF,
            "leakage_nW": ct.leakage_nW,
            "i_on_up_uA": ct.i_on_up_uA,
            "i_on_down_uA": ct.i_on_down_uA,
            "setup_ps": ct.setup_ps,
            "area_um2": ct.area_um2,
            "elec": asdict(ct.elec),
        }
        with open(os.path.join(outdir, "cells", f"{name}.csv"), "w") as fh:
            fh.write("arc,slew_ps,load_fF,delay_ps,out_slew_ps,energy_fJ\n")
            for (pin, direction), tab in sorted(ct.arcs.items()):
                for i, s in enumerate(tab.slews_ps):
                    for j, l in enumerate(tab.loads_fF):
                        fh.write(f"{pin}:{direction},{s!r},{l!r},{tab.delay_ps[i][j]!r},"
                                 f"{tab.out_slew_ps[i][j]!r},{tab.energy_fJ[i][j]!r}\n")
    with open(os.path.join(outdir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)


def load_library(outdir) -> CellLibrary:
    path = os.path.join(outdir, "manifest.json")
    with open(path) as fh:
        manifest = json.load(fh)
    dims = CellDims(**manifest["dims"])
    vs_n = VSParams(**manifest["vs_n"])
    vs_p = VSParams(**manifest["vs_p"])
    cells = {}
    for name, meta in manifest["cells"].items():
        rows = {}
        csv_path = os.path.join(outdir, "cells", f"{name}.csv")
        with open(csv_path) as fh:
            header = fh.readline().strip()
            if header != "arc,slew_ps,load_fF,delay_ps,out_slew_ps,energy_fJ":
                raise SchemaError(f"{csv_path}: bad header {header!r}")
            for line in fh:
                arc, s, l, d, osl, e = line.strip().split(",")
                rows.setdefault(arc, []).append((float(s), float(l), float(d), float(osl), float(e)))
        arcs = {}
        for arc, entries in rows.items():
            pin, _, direction = arc.partition(":")
            slews = tuple(sorted({r[0] for r in entries}))
            loads = tuple(sorted({r[1] for r in entries}))
            idx = {(r[0], r[1]): r for r in entries}
            delay = tuple(tuple(idx[(s, l)][2] for l in loads) for s in slews)
            oslew = tuple(tuple(idx[(s, l)][3] for l in loads) for s in slews)
            energy = tuple(tuple(idx[(s, l)][4] for l in loads) for s in slews)
            arcs[(pin, direction)] = ArcTable(slews, loads, delay, oslew, energy)
        geom = CellGeometry(cell_name=name, n_fingers=meta["n_fingers"], dims=dims)
        cells[name] = CharTable(
            name=name, geometry=geom, inverting=meta["inverting"],
            input_pins=tuple(meta["input_pins"]), arcs=arcs,
            pin_caps_fF=meta["pin_caps_fF"], leakage_nW=meta["leakage_nW"],
            i_on_up_uA=meta["i_on_up_uA"], i_on_down_uA=meta["i_on_down_uA"],
            elec=ElecModel(**meta["elec"]), setup_ps=meta["setup_ps"])
    return CellLibrary(cells=cells, v_dd=manifest["v_dd"], dims=dims, vs_n=vs_n,
                       vs_p=vs_p, lib_id=manifest["lib_id"],
                       nominal_slew_ps=manifest["nominal_slew_ps"])
