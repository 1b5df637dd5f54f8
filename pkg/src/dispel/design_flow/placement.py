"""Row-based placement by simulated annealing on total HPWL.

The anneal runs on a uniform slot grid (slot pitch = average cell width);
a final legalization pass packs each row with the cells' real widths,
spreading the leftover space evenly, so the returned positions never
overlap. Rows that end up over-full trade their widest cells to the
emptiest rows first. I/O pins sit on the top edge. Everything is seeded
and deterministic, and placements are cached on (netlist hash, grid,
seed, move budget): the slot grid is technology-independent, so sweeps
over device/interconnect parameters reuse one arrangement scaled to their
own pitches.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from ..errors import CapacityError, ParameterError
from .netlist import Netlist

MOVES_PER_CELL = 1000


@dataclass(frozen=True)
class Floorplan:
    width_um: float
    height_um: float
    aspect: float               # height / width, fixed across resizes
    utilization_target: float
    row_height_um: float

    @property
    def area_um2(self) -> float:
        return self.width_um * self.height_um


def make_floorplan(total_cell_area_um2: float, utilization: float, aspect: float,
                   row_height_um: float) -> Floorplan:
    """Size a die for the target utilization at a fixed aspect ratio."""
    if not (0 < utilization <= 1):
        raise ParameterError(f"utilization must be in (0, 1], got {utilization}")
    area = total_cell_area_um2 / utilization
    height = math.sqrt(area * aspect)
    rows = max(1, round(height / row_height_um))
    height = rows * row_height_um
    width = area / height
    return Floorplan(width_um=width, height_um=height, aspect=aspect,
                     utilization_target=utilization, row_height_um=row_height_um)


@dataclass
class Placement:
    floorplan: Floorplan
    rows: int
    cols: int
    slot_w_um: float
    positions: dict      # cell id -> (x_um, y_um), legalized centers
    io_positions: dict   # pin name -> (x_um, y_um), top edge
    hpwl_um: float
    seed: int


_CACHE: dict = {}


def clear_placement_cache() -> None:
    _CACHE.clear()


def _cell_widths(netlist: Netlist, library) -> dict:
    widths = {}
    for gid, g in netlist.gates.items():
        widths[gid] = library.cell(g.cell).geometry.width_nm * 1e-3
    dff_w = library.cell("DFF").geometry.width_nm * 1e-3
    for rid in netlist.regs:
        widths[rid] = dff_w
    return widths


def _net_pins(netlist: Netlist):
    """Per net: movable cell ids plus fixed I/O endpoints (2+ pins only)."""
    nets = []
    for net in netlist.driver:
        driver = netlist.driver[net]
        cells, fixed = [], []
        for who in [driver] + [(s[0], s[1]) for s in netlist.sinks.get(net, [])]:
            if who[0] == "pin":
                fixed.append(who[1])
            else:
                cells.append(who[1])
        if len(cells) + len(fixed) >= 2:
            nets.append((net, cells, fixed))
    return nets


def _legalize(order_by_row, widths, floorplan, rows):
    """Pack each row with real widths, spreading slack evenly; rebalance
    over-full rows by handing their widest cells to the emptiest row."""
    width_avail = floorplan.width_um
    row_fill = [sum(widths[c] for c in row) for row in order_by_row]
    for r in range(rows):
        guard = 0
        while row_fill[r] > width_avail and guard < 10000:
            guard += 1
            victim = max(order_by_row[r], key=lambda c: (widths[c], c))
            target = min(range(rows), key=lambda k: (row_fill[k], k))
            if target == r or row_fill[target] + widths[victim] > width_avail:
                raise CapacityError("cells do not fit the die rows")
            order_by_row[r].remove(victim)
            order_by_row[target].append(victim)
            row_fill[r] -= widths[victim]
            row_fill[target] += widths[victim]
    positions = {}
    for r, row in enumerate(order_by_row):
        k = len(row)
        if k == 0:
            continue
        gap = (width_avail - row_fill[r]) / (k + 1)
        x = 0.0
        y = (r + 0.5) * floorplan.row_height_um
        for c in row:
            x += gap
            positions[c] = (x + widths[c] / 2.0, y)
            x += widths[c]
    return positions


def place(netlist: Netlist, floorplan: Floorplan, library, seed: int = 0,
          moves_per_cell: int = MOVES_PER_CELL, cache: bool = True) -> Placement:
    """Anneal the netlist onto the floorplan's slot grid, then legalize."""
    cell_ids = sorted(netlist.gates) + sorted(netlist.regs)
    widths = _cell_widths(netlist, library)
    total_w = sum(widths[c] for c in cell_ids)
    total_area = total_w * floorplan.row_height_um
    if total_area > floorplan.utilization_target * floorplan.area_um2 * 1.02 + 1e-9:
        raise CapacityError(
            f"cell area {total_area:.1f} um2 exceeds {floorplan.utilization_target:.0%} "
            f"of die {floorplan.area_um2:.1f} um2")
    rows = max(1, round(floorplan.height_um / floorplan.row_height_um))
    if total_w > rows * floorplan.width_um:
        raise CapacityError("total cell width exceeds row capacity")
    avg_w = total_w / len(cell_ids)
    cols = max(1, int(floorplan.width_um / avg_w))
    while rows * cols < len(cell_ids):
        cols += 1
    slot_w = floorplan.width_um / cols

    key = None
    if cache:
        key = (netlist.hash(), rows, cols, seed, moves_per_cell,
               round(floorplan.row_height_um, 9), round(floorplan.width_um, 6))
        hit = _CACHE.get(key)
        if hit is not None:
            return hit

    io_names = [p.name for p in netlist.pins]
    io_positions = {name: ((i + 0.5) / len(io_names) * floorplan.width_um,
                           floorplan.height_um)
                    for i, name in enumerate(io_names)}

    rng = random.Random(seed)
    order = list(cell_ids)
    rng.shuffle(order)
    slot_of = {cid: idx for idx, cid in enumerate(order)}
    occupied = {idx: cid for cid, idx in slot_of.items()}

    def slot_xy(slot):
        r, c = divmod(slot, cols)
        return ((c + 0.5) * slot_w, (r + 0.5) * floorplan.row_height_um)

    pos = {cid: slot_xy(s) for cid, s in slot_of.items()}
    nets = _net_pins(netlist)
    nets_of = {cid: [] for cid in cell_ids}
    for ni, (_, cells, _) in enumerate(nets):
        for cid in cells:
            nets_of[cid].append(ni)

    def net_hpwl(ni):
        _, cells, fixed = nets[ni]
        xs = [pos[c][0] for c in cells] + [io_positions[f][0] for f in fixed]
        ys = [pos[c][1] for c in cells] + [io_positions[f][1] for f in fixed]
        return (max(xs) - min(xs)) + (max(ys) - min(ys))

    hpwl = [net_hpwl(i) for i in range(len(nets))]

    n_moves = moves_per_cell * len(cell_ids)
    t0 = (slot_w + floorplan.row_height_um) * 2.0
    alpha = (1e-4) ** (1.0 / max(n_moves, 1))
    temp = t0
    n_slots = rows * cols

    for _ in range(n_moves):
        a = cell_ids[rng.randrange(len(cell_ids))]
        target = rng.randrange(n_slots)
        b = occupied.get(target)
        if b == a:
            temp *= alpha
            continue
        affected = nets_of[a] if b is None else sorted(set(nets_of[a]) | set(nets_of[b]))
        before = sum(hpwl[i] for i in affected)
        sa, xa = slot_of[a], pos[a]
        pos[a] = slot_xy(target)
        if b is not None:
            pos[b] = xa
        after = sum(net_hpwl(i) for i in affected)
        delta = after - before
        if delta <= 0 or rng.random() < math.exp(-delta / temp):
            slot_of[a] = target
            occupied[target] = a
            if b is not None:
                slot_of[b] = sa
                occupied[sa] = b
            else:
                del occupied[sa]
            for i in affected:
                hpwl[i] = net_hpwl(i)
        else:
            pos[a] = xa
            if b is not None:
                pos[b] = slot_xy(target)
        temp *= alpha

    order_by_row = [[] for _ in range(rows)]
    for slot in sorted(occupied):
        r = slot // cols
        order_by_row[r].append(occupied[slot])
    positions = _legalize(order_by_row, widths, floorplan, rows)
    pos.update(positions)
    total = sum(net_hpwl(i) for i in range(len(nets)))

    out = Placement(floorplan=floorplan, rows=rows, cols=cols, slot_w_um=slot_w,
                    positions=positions, io_positions=io_positions,
                    hpwl_um=total, seed=seed)
    if cache and key is not None:
        _CACHE[key] = out
    return out
