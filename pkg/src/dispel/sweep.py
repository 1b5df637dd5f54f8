"""Sweep orchestration: Pareto energy-frequency curves, device-structure
optimization, wire-resistance-multiplier studies, and dataset emission.

The energy-frequency methodology per supply voltage: tune the device
thresholds to the leakage target, build and characterize the library, run
the flow over a coarse target-frequency grid, resize the die to the
utilization target at the best achieved frequency, then refine with a
fine grid around it. Every implementation point is recorded; the Pareto
frontier keeps the lowest-energy point at each achieved frequency.

Grid points run in parallel when DISPEL_THREADS > 1 (results merge in
grid order regardless of completion order); the placement is computed
once up front so workers share it through the cache.
"""

from __future__ import annotations

import csv
import hashlib
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

from .cell_library import CellDims, CellLibrary, build_library, fo3_features
from .dataset import ALL_COLUMNS, save_features_csv
from .design_flow import (DesignResult, FlowConfig, Netlist, RESULT_COLUMNS,
                          f_ach, make_floorplan, place, run_flow, sta)
from .design_flow.flow import OptimizedDesign, power_area
from .errors import ParameterError
from .interconnect import TechStack, save_itf, scale_wire_resistance, via_resistance, wire_rc_per_um
from .vsdevice import VSParams, tune_vt

PROBE_F_TAR_GHZ = 500.0


@dataclass(frozen=True)
class DevicePair:
    n: VSParams
    p: VSParams


@dataclass(frozen=True)
class SweepConfig:
    """Grids and knobs for one energy-frequency sweep.

    The literal grid defaults mirror the methodology's published values
    (coarse 1-3 GHz in 0.2 steps, fine 0.02 steps, V_DD 0.5-0.9 in 0.1
    steps); `ftar_auto` rescales the coarse grid to the probed top speed
    of the actual design, which desk-scale synthetic netlists need.
    """

    vdd_grid: tuple = (0.5, 0.6, 0.7, 0.8, 0.9)
    ftar_coarse: tuple = tuple(round(1.0 + 0.2 * k, 3) for k in range(11))
    ftar_fine_step: float = 0.02
    ftar_fine_span: float = 0.1
    ftar_auto: bool = False
    i_off_nA_um: float = 1.0
    utilization: float = 0.60
    l_spa_grid: tuple = (4.0, 6.0, 8.0, 10.0, 12.0)
    x_rw_list: tuple = (0.5, 1.0, 2.0, 4.0)
    seed: int = 42
    activity: float = 0.1
    moves_per_cell: int = 1000
    dims: CellDims = field(default_factory=CellDims)
    n_gates: int = 5000
    depth: int = 24
    fanout_mean: float = 2.2
    rent_exponent: float = 0.6

    def flow_config(self) -> FlowConfig:
        return FlowConfig(activity=self.activity, utilization=self.utilization,
                          moves_per_cell=self.moves_per_cell, seed=self.seed)


@dataclass(frozen=True)
class EFPoint:
    f_ach: float
    energy: float
    area: float
    v_dd: float
    provenance: str  # config hash of the recorded DesignResult


@dataclass
class ResultStore:
    """The orchestrator is the only writer; everything keyed by hash/id."""

    results: dict = field(default_factory=dict)
    libraries: dict = field(default_factory=dict)
    stacks: dict = field(default_factory=dict)
    lib_of: dict = field(default_factory=dict)    # result hash -> lib id
    stack_of: dict = field(default_factory=dict)  # result hash -> stack id
    keep_designs: bool = False
    designs: dict = field(default_factory=dict)   # result hash -> OptimizedDesign

    def add(self, result: DesignResult, library: CellLibrary, stack_id: str,
            stack: TechStack, design=None) -> None:
        self.results[result.config_hash] = result
        self.libraries.setdefault(library.lib_id, library)
        self.stacks.setdefault(stack_id, stack)
        self.lib_of[result.config_hash] = library.lib_id
        self.stack_of[result.config_hash] = stack_id
        if self.keep_designs and design is not None:
            self.designs[result.config_hash] = design


def stack_id(stack: TechStack) -> str:
    return hashlib.sha256(repr(stack).encode()).hexdigest()[:16]


_LIB_CACHE: dict = {}


def clear_library_cache() -> None:
    _LIB_CACHE.clear()


def build_library_cached(dims: CellDims, tech: TechStack, vs_n: VSParams,
                         vs_p: VSParams, v_dd: float) -> CellLibrary:
    """Characterization does not see the wire multiplier, so multiplier
    sweeps (and dataset generation across x_rw) share one library."""
    base = replace(tech, x_rw=1.0, x_rw_applies_to_vias=False)
    key = hashlib.sha256(repr((dims, vs_n, vs_p, v_dd, base)).encode()).hexdigest()
    lib = _LIB_CACHE.get(key)
    if lib is None:
        lib = build_library(dims, base, vs_n, vs_p, v_dd)
        _LIB_CACHE[key] = lib
    return lib


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("DISPEL_THREADS", "1")))
    except ValueError:
        return 1


def _run_one(args):
    netlist, library, stack, f_tar, cfg, floorplan, keep = args
    return run_flow(netlist, library, stack, f_tar, cfg, floorplan,
                    return_design=keep)


def _map_flow(netlist, library, stack, f_tars, cfg, floorplan, keep=False):
    jobs = [(netlist, library, stack, f, cfg, floorplan, keep) for f in f_tars]
    n = _threads()
    if n <= 1 or len(jobs) <= 1:
        out = [_run_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(n, len(jobs))) as pool:
            out = list(pool.map(_run_one, jobs))
    return out if keep else [(r, None) for r in out]


def ef_sweep(cfg: SweepConfig, tech: TechStack, devices: DevicePair,
             netlist: Netlist, store: ResultStore | None = None) -> list:
    """Full per-V_DD implementation sweep; returns every EFPoint in grid order."""
    store = store if store is not None else ResultStore()
    sid = stack_id(tech)
    flow_cfg = cfg.flow_config()
    points = []
    for v_dd in cfg.vdd_grid:
        vs_n = tune_vt(devices.n, cfg.i_off_nA_um, v_dd)
        vs_p = tune_vt(devices.p, cfg.i_off_nA_um, v_dd)
        library = build_library_cached(cfg.dims, tech, vs_n, vs_p, v_dd)
        row_h = library.cell("INV_X1").geometry.height_nm * 1e-3
        base_area = (sum(library.cell(g.cell).area_um2 for g in netlist.gates.values())
                     + len(netlist.regs) * library.cell("DFF").area_um2)
        floorplan = make_floorplan(base_area, cfg.utilization, flow_cfg.aspect, row_h)
        place(netlist, floorplan, library, seed=cfg.seed,
              moves_per_cell=cfg.moves_per_cell)  # shared via cache before forking

        coarse = list(cfg.ftar_coarse)
        if cfg.ftar_auto:
            probe, pdesign = run_flow(netlist, library, tech, PROBE_F_TAR_GHZ,
                                      flow_cfg, floorplan, return_design=True)
            store.add(probe, library, sid, tech, pdesign)
            points.append(_point(probe))
            f_top = probe.f_ach_GHz
            # span the effort regime: from well below the design's natural
            # speed up to just past the probed ceiling
            fracs = [0.5 + k * (1.08 - 0.5) / max(len(coarse) - 1, 1)
                     for k in range(len(coarse))]
            coarse = [round(f_top * fr, 4) for fr in fracs]

        pairs = _map_flow(netlist, library, tech, coarse, flow_cfg, floorplan,
                          keep=store.keep_designs)
        results = [r for r, _ in pairs]
        for res, design in pairs:
            store.add(res, library, sid, tech, design)
            points.append(_point(res))

        if cfg.ftar_fine_step <= 0 or cfg.ftar_fine_span <= 0:
            continue  # no refinement phase requested
        best = max(results, key=lambda r: (r.f_ach_GHz, -r.energy_pJ))
        resized = make_floorplan(best.cell_area_um2, cfg.utilization,
                                 flow_cfg.aspect, row_h)
        place(netlist, resized, library, seed=cfg.seed,
              moves_per_cell=cfg.moves_per_cell)
        steps = int(round(2 * cfg.ftar_fine_span / cfg.ftar_fine_step))
        fine = [round(best.f_ach_GHz - cfg.ftar_fine_span + k * cfg.ftar_fine_step, 6)
                for k in range(steps + 1)]
        fine = [f for f in fine if f > 0]
        pairs = _map_flow(netlist, library, tech, fine, flow_cfg, resized,
                          keep=store.keep_designs)
        for res, design in pairs:
            store.add(res, library, sid, tech, design)
            points.append(_point(res))
    return points


def _point(res: DesignResult) -> EFPoint:
    return EFPoint(f_ach=res.f_ach_GHz, energy=res.energy_pJ,
                   area=res.cell_area_um2, v_dd=res.v_dd_V,
                   provenance=res.config_hash)


def pareto_frontier(points) -> list:
    """Non-dominated set under (maximize f_ach, minimize energy).

    Exact (f, energy) duplicates collapse to the one with lower area, then
    lower V_DD. Result is sorted by ascending f_ach.
    """
    pts = list(points)
    if not pts:
        raise ParameterError("pareto_frontier needs at least one point")
    dedup = {}
    for p in pts:
        key = (p.f_ach, p.energy)
        old = dedup.get(key)
        if old is None or (p.area, p.v_dd) < (old.area, old.v_dd):
            dedup[key] = p
    pts = list(dedup.values())
    out = []
    for p in pts:
        dominated = False
        for q in pts:
            if q is p:
                continue
            if (q.f_ach >= p.f_ach and q.energy <= p.energy
                    and (q.f_ach > p.f_ach or q.energy < p.energy)):
                dominated = True
                break
        if not dominated:
            out.append(p)
    out.sort(key=lambda p: (p.f_ach, p.energy, p.area, p.v_dd))
    return out


def min_edp(points) -> tuple:
    """(EDP in pJ*ns, the point) minimized over the given points."""
    best = None
    for p in points:
        edp = p.energy / p.f_ach
        if best is None or edp < best[0]:
            best = (edp, p)
    return best


@dataclass
class DeviceOptRow:
    l_spa: float
    l_con: float
    min_edp_pJ_ns: float
    f_at_min_GHz: float
    energy_at_min_pJ: float
    area_at_min_um2: float


def device_opt(l_spa_grid, cfg: SweepConfig, tech: TechStack, devices: DevicePair,
               netlist: Netlist, v_dd: float, store: ResultStore | None = None):
    """Min-EDP vs gate-spacer length at fixed CGP and gate length."""
    store = store if store is not None else ResultStore()
    dims0 = cfg.dims
    rows = []
    for l_spa in l_spa_grid:
        l_con = dims0.cgp - dims0.l_gate - 2.0 * l_spa
        if l_con <= 0:
            raise ParameterError(f"l_spa={l_spa} leaves non-positive l_con={l_con}")
        dims = replace(dims0, l_spa=l_spa, l_con=l_con)
        sub = replace(cfg, dims=dims, vdd_grid=(v_dd,))
        pts = ef_sweep(sub, tech, devices, netlist, store)
        edp, p = min_edp(pts)
        rows.append(DeviceOptRow(l_spa=l_spa, l_con=l_con, min_edp_pJ_ns=edp,
                                 f_at_min_GHz=p.f_ach, energy_at_min_pJ=p.energy,
                                 area_at_min_um2=p.area))
    argmin = min(rows, key=lambda r: (r.min_edp_pJ_ns, r.l_spa))
    return rows, argmin


@dataclass
class XrwRow:
    x_rw: float
    min_edp_pJ_ns: float
    area_at_min_um2: float
    area_at_ref_um2: float  # at the shared reference f_TAR (x=1 optimum)
    ro_baseline_edp: float


def _ro_baseline(library: CellLibrary, tech: TechStack, wire_len_um: float, x: float) -> float:
    """Fixed-wire ring-oscillator stage EDP model, linear in the multiplier."""
    inv = library.cell("INV_X1")
    tab = inv.arc("A", "fall")
    r_w, c_w = wire_rc_per_um(tech.layer("M2"), scale_wire_resistance(tech, x / tech.x_rw))
    c_pin = 3.0 * inv.pin_caps_fF["A"]
    load = c_w * wire_len_um + c_pin
    d_cell = tab.delay(library.nominal_slew_ps, load)
    d_wire = (r_w * wire_len_um * 1e-3) * (2.0 / 3.0 * c_w * wire_len_um + c_pin)
    energy = load * library.v_dd ** 2
    return energy * (d_cell + d_wire)


def _retime_edp(design_opt, library, f_tar: float, flow_cfg: FlowConfig,
                r_ratio: float, via_ratio: float):
    """EDP of a frozen implementation with its wire resistances rescaled.

    The multiplier only scales resistance, so re-evaluation is a pure
    timing/power pass: no re-placement, no re-optimization.
    """
    design = design_opt.design
    saved = dict(design.nets)
    for name, rn in saved.items():
        design.nets[name] = replace(rn, r_wire_ohm=rn.r_wire_ohm * r_ratio,
                                    r_via_ohm=rn.r_via_ohm * via_ratio)
    rep = sta(design, library, f_tar, flow_cfg.clock_uncertainty_frac / f_tar)
    f = f_ach(f_tar, rep.t_slack_ns)
    shadow = OptimizedDesign(design=design, report=rep,
                             placement=design_opt.placement,
                             stack=design_opt.stack, rounds=0,
                             cell_area_um2=design_opt.cell_area_um2)
    power_mw, energy_pj = power_area(shadow, library, library.v_dd, f,
                                     flow_cfg.activity)
    design.nets.clear()
    design.nets.update(saved)
    return energy_pj / f, energy_pj, f


def xrw_sweep(x_rw_list, cfg: SweepConfig, tech: TechStack, devices: DevicePair,
              netlist: Netlist, store: ResultStore | None = None,
              include_vias: bool = False):
    """Min-EDP and area versus the wire-resistance multiplier.

    Each multiplier gets its own re-implementation; the winners of every
    multiplier are then cross-evaluated (retimed) under all the others, so
    the reported min-EDP is a minimum over one shared candidate pool plus
    each multiplier's own points. Retiming a fixed design is strictly
    monotone in wire resistance, which keeps the reported trend free of
    greedy-optimizer noise.
    """
    store = store if store is not None else ResultStore()
    store.keep_designs = True
    if 1.0 not in x_rw_list:
        x_rw_list = sorted(set(list(x_rw_list) + [1.0]))
    flow_cfg = cfg.flow_config()
    by_x = {}
    winners = {}
    for x in x_rw_list:
        scaled = scale_wire_resistance(tech, x, include_vias=include_vias)
        pts = ef_sweep(cfg, scaled, devices, netlist, store)
        edp, p = min_edp(pts)
        by_x[x] = (edp, p, pts)
        win = store.designs.get(p.provenance)
        if win is not None:
            winners[x] = (win, store.results[p.provenance],
                          store.libraries[store.lib_of[p.provenance]])
        # keep only winning designs to bound memory
        keep = {w[1].config_hash for w in winners.values()}
        for h in [h for h in store.designs if h not in keep]:
            del store.designs[h]
    # baseline: anchor the fixed-wire RO line at the x=1 measured EDP
    edp1, p1, _ = by_x[1.0]
    res1 = store.results[p1.provenance]
    lib1 = store.libraries[store.lib_of[p1.provenance]]
    wire_len = res1.avg_net_len_um
    ro1 = _ro_baseline(lib1, tech, wire_len, 1.0)
    # reference target: the fastest grid point every multiplier still closes
    feasible = None
    for x in x_rw_list:
        ok = {store.results[q.provenance].f_tar_GHz for q in by_x[x][2]
              if store.results[q.provenance].t_slack_ns >= 0}
        feasible = ok if feasible is None else (feasible & ok)
    f_ref = max(feasible) if feasible else res1.f_tar_GHz
    rows = []
    for x in x_rw_list:
        edp, p, pts = by_x[x]
        area_min = p.area
        for xw, (design, res, lib) in winners.items():
            if xw == x:
                continue
            r_ratio = x / xw
            via_ratio = r_ratio if include_vias else 1.0
            cross_edp, _, _ = _retime_edp(design, lib, res.f_tar_GHz, flow_cfg,
                                          r_ratio, via_ratio)
            if cross_edp < edp:
                edp = cross_edp
                area_min = res.cell_area_um2
        ro = _ro_baseline(lib1, tech, wire_len, x) / ro1 * edp1
        at_ref = [store.results[q.provenance] for q in pts
                  if abs(store.results[q.provenance].f_tar_GHz - f_ref) < 1e-9]
        area_ref = max((r.cell_area_um2 for r in at_ref), default=area_min)
        rows.append(XrwRow(x_rw=x, min_edp_pJ_ns=edp, area_at_min_um2=area_min,
                           area_at_ref_um2=area_ref, ro_baseline_edp=ro))
    return rows


def interconnect_features(stack: TechStack) -> list:
    """The 9 interconnect features: R/C of M2, M4, M6; R of V1, V3, V5."""
    feats = []
    for wire in ("M2", "M4", "M6"):
        r, c = wire_rc_per_um(stack.layer(wire), stack)
        feats.extend([r, c])
    for via in ("V1", "V3", "V5"):
        feats.append(via_resistance(stack.layer(via), stack))
    return feats


def emit_dataset(points, store: ResultStore):
    """FeatureRow table from the per-(technology, V_DD) Pareto frontiers.

    Only frontier points survive; each row is 30 logic features + 9
    interconnect features + V_DD + f_ach, with energy and area labels.
    """
    groups = {}
    for p in points:
        key = (store.lib_of[p.provenance], store.stack_of[p.provenance], p.v_dd)
        groups.setdefault(key, []).append(p)
    fo3_cache = {}
    rows = []
    for key in sorted(groups, key=lambda k: (k[0], k[1], k[2])):
        lib_id, sid, v_dd = key
        frontier = pareto_frontier(groups[key])
        library = store.libraries[lib_id]
        stack = store.stacks[sid]
        if lib_id not in fo3_cache:
            fo3_cache[lib_id] = fo3_features(library)
        logic = fo3_cache[lib_id]
        itc = interconnect_features(stack)
        for p in frontier:
            features = list(logic) + list(itc) + [v_dd, p.f_ach]
            rows.append((features, p.energy, p.area))
    return rows


@dataclass(frozen=True)
class TechVariant:
    """One technology-parameter combination for dataset generation."""

    name: str
    mu_scale: float = 1.0
    v_scale: float = 1.0
    rho_con_ohm_cm2: float | None = None
    k_spacer: float | None = None
    k_ild_scale: float = 1.0
    x_rw: float = 1.0


def apply_variant(var: TechVariant, tech: TechStack, devices: DevicePair,
                  cfg: SweepConfig):
    """Materialize a variant: scaled devices, modified stack, adjusted dims."""
    n = replace(devices.n, mu=devices.n.mu * var.mu_scale, v=devices.n.v * var.v_scale)
    p = replace(devices.p, mu=devices.p.mu * var.mu_scale, v=devices.p.v * var.v_scale)
    stack = tech
    if var.rho_con_ohm_cm2 is not None:
        stack = replace(stack, rho_con_ohm_cm2=var.rho_con_ohm_cm2)
    if var.k_ild_scale != 1.0:
        layers = tuple(replace(l, k_ild=l.k_ild * var.k_ild_scale) for l in stack.layers)
        stack = replace(stack, layers=layers)
    if var.x_rw != 1.0:
        stack = scale_wire_resistance(stack, var.x_rw)
    out_cfg = cfg
    if var.k_spacer is not None:
        out_cfg = replace(cfg, dims=replace(cfg.dims, k_spacer=var.k_spacer))
    return stack, DevicePair(n=n, p=p), out_cfg


def default_variants():
    """The stock technology grid for surrogate training data."""
    out = [TechVariant("base")]
    for mu, v in ((0.7, 0.85), (0.85, 1.1), (1.2, 0.9), (1.4, 1.2), (1.0, 1.25)):
        out.append(TechVariant(f"dev_m{mu}_v{v}", mu_scale=mu, v_scale=v))
    for rho in (3e-8, 6e-8):
        out.append(TechVariant(f"rcon_{rho:g}", rho_con_ohm_cm2=rho))
        out.append(TechVariant(f"rcon_{rho:g}_slow", rho_con_ohm_cm2=rho,
                               mu_scale=0.8, v_scale=0.9))
    for x in (0.6, 1.5, 2.5):
        out.append(TechVariant(f"xrw_{x:g}", x_rw=x))
        out.append(TechVariant(f"xrw_{x:g}_fast", x_rw=x, mu_scale=1.3, v_scale=1.1))
    for ks in (3.2, 5.8):
        out.append(TechVariant(f"kspa_{ks:g}", k_spacer=ks))
    for kild in (0.75, 1.25):
        out.append(TechVariant(f"kild_{kild:g}", k_ild_scale=kild))
        out.append(TechVariant(f"kild_{kild:g}_r", k_ild_scale=kild, x_rw=1.8))
    out += [
        TechVariant("rcon_1.5e-08", rho_con_ohm_cm2=1.5e-8),
        TechVariant("rcon_1e-07", rho_con_ohm_cm2=1e-7),
        TechVariant("mix_a", mu_scale=0.9, v_scale=0.95, rho_con_ohm_cm2=2e-8,
                    x_rw=1.2),
        TechVariant("mix_b", mu_scale=1.1, v_scale=1.05, k_spacer=5.0, x_rw=0.7),
        TechVariant("mix_c", mu_scale=1.25, v_scale=0.85, k_ild_scale=0.85),
        TechVariant("mix_d", mu_scale=0.75, v_scale=1.15, rho_con_ohm_cm2=5e-8,
                    k_ild_scale=1.15),
        TechVariant("mix_e", x_rw=3.0, k_spacer=4.0),
        TechVariant("mix_f", mu_scale=1.35, v_scale=1.3, rho_con_ohm_cm2=1.2e-8,
                    k_ild_scale=0.9),
        TechVariant("mix_g", mu_scale=0.65, v_scale=0.8, x_rw=2.0, k_spacer=5.4),
        TechVariant("mix_h", mu_scale=1.05, v_scale=1.15, rho_con_ohm_cm2=4e-8,
                    x_rw=1.4, k_ild_scale=1.1),
    ]
    return out


def _run_variant(args):
    var, cfg, tech, devices, netlist = args
    stack_v, dev_v, cfg_v = apply_variant(var, tech, devices, cfg)
    store = ResultStore()
    points = ef_sweep(cfg_v, stack_v, dev_v, netlist, store)
    return var.name, points, store


def generate_dataset(variants, cfg: SweepConfig, tech: TechStack,
                     devices: DevicePair, netlist: Netlist):
    """Sweep every variant and emit the frontier feature rows.

    Variants run in parallel when DISPEL_THREADS > 1; results merge in
    variant order, so the emitted CSV is independent of scheduling.
    """
    jobs = [(var, cfg, tech, devices, netlist) for var in variants]
    n = _threads()
    if n <= 1 or len(jobs) <= 1:
        outs = [_run_variant(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(n, len(jobs))) as pool:
            outs = list(pool.map(_run_variant, jobs))
    merged = ResultStore()
    all_points = []
    for name, points, store in outs:
        merged.results.update(store.results)
        merged.libraries.update(store.libraries)
        merged.stacks.update(store.stacks)
        merged.lib_of.update(store.lib_of)
        merged.stack_of.update(store.stack_of)
        all_points.extend(points)
    rows = emit_dataset(all_points, merged)
    return rows, merged


# --- CSV emission ------------------------------------------------------------

def write_results_csv(store: ResultStore, path, header_comment: str | None = None) -> None:
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        w = csv.writer(fh)
        w.writerow(RESULT_COLUMNS)
        for h in sorted(store.results):
            w.writerow(store.results[h].csv_row())


FRONTIER_COLUMNS = ("f_ach_GHz", "energy_pJ", "area_um2", "v_dd_V", "provenance")


def write_frontier_csv(points, path, header_comment: str | None = None) -> None:
    frontier = pareto_frontier(points)
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        w = csv.writer(fh)
        w.writerow(FRONTIER_COLUMNS)
        for p in frontier:
            w.writerow([repr(p.f_ach), repr(p.energy), repr(p.area), repr(p.v_dd),
                        p.provenance])
