"""Synthetic structural netlists and their text format.

Generation builds a levelized DAG: `depth` stages of combinational gates
between an input and an output register bank. The gate-fanin mix is solved
so that the measured mean net fanout tracks the requested fanout
distribution mean (gate fanins top out at 3, so very high fanout targets
saturate). A Rent-style locality knob diverts a fraction of input pins to
drivers from earlier stages, standing in for the long wires of a real
hierarchy. Every stage driver is guaranteed at least one sink, and every
dangling output is captured by the output register bank.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field

from ..errors import ParameterError, SchemaError


@dataclass(frozen=True)
class Gate:
    id: str
    cell: str              # full cell name, e.g. NAND2_X1
    inputs: tuple          # net names, one per input pin
    output: str


@dataclass(frozen=True)
class Reg:
    id: str
    d: str
    q: str


@dataclass(frozen=True)
class Pin:
    name: str
    direction: str  # in | out
    net: str


@dataclass(frozen=True)
class FanoutDist:
    """Shifted-geometric fanout distribution over {1, 2, ...}."""

    mean: float = 2.2
    cap: int = 12

    def sample(self, rng: random.Random) -> int:
        if self.mean <= 1.0:
            return 1
        q = 1.0 - 1.0 / self.mean
        k = 1
        while rng.random() < q and k < self.cap:
            k += 1
        return k


@dataclass
class Netlist:
    gates: dict
    regs: dict
    pins: list
    depth: int

    def __post_init__(self):
        self._index()

    def _index(self):
        self.driver = {}
        self.sinks = {}
        for p in self.pins:
            if p.direction == "in":
                self._add_driver(p.net, ("pin", p.name))
        for r in self.regs.values():
            self._add_driver(r.q, ("reg", r.id))
        for g in self.gates.values():
            self._add_driver(g.output, ("gate", g.id))
        for p in self.pins:
            if p.direction == "out":
                self.sinks.setdefault(p.net, []).append(("pin", p.name, 0))
        for r in self.regs.values():
            self.sinks.setdefault(r.d, []).append(("reg", r.id, 0))
        for g in self.gates.values():
            for k, net in enumerate(g.inputs):
                self.sinks.setdefault(net, []).append(("gate", g.id, k))
        for net in list(self.sinks):
            if net not in self.driver:
                raise SchemaError(f"net {net!r} has sinks but no driver")

    def _add_driver(self, net, who):
        if net in self.driver:
            raise SchemaError(f"net {net!r} has two drivers: {self.driver[net]} and {who}")
        self.driver[net] = who

    @property
    def nets(self):
        return self.driver.keys()

    def mean_fanout(self) -> float:
        total = sum(len(s) for s in self.sinks.values())
        return total / len(self.driver)

    def hash(self) -> str:
        return hashlib.sha256(serialize_netlist(self).encode()).hexdigest()[:16]


_K_CLASSES = {1: ("INV",), 2: ("NAND2", "NOR2"), 3: ("NAND3", "NOR3", "AOI21")}


def _solve_fanin_mix(mean_fanout, n_gates, w, n_pi):
    """Pick fanin probabilities so pins/nets lands on the fanout target."""
    nets = n_pi + w + n_gates + w
    mu_k = (mean_fanout * nets - w - 2.0 * w) / max(n_gates, 1)
    mu_k = min(max(mu_k, 1.0), 3.0)
    p1 = min(max(0.5 * (2.4 - mu_k), 0.03), 0.5)
    p3 = min(max(mu_k - 2.0 + p1, 0.0), 1.0 - p1)
    p2 = 1.0 - p1 - p3
    if p2 < 0:
        p3 += p2
        p2 = 0.0
    return (p1, p2, p3)


def generate_netlist(n_gates: int, depth: int, fanout_dist=2.2,
                     rent_exponent: float = 0.6, seed: int = 0) -> Netlist:
    """Deterministic synthetic netlist with ~n_gates gates in `depth` stages."""
    if not (n_gates >= depth >= 1):
        raise ParameterError(f"need n_gates >= depth >= 1, got {n_gates}, {depth}")
    dist = FanoutDist(mean=float(fanout_dist)) if not isinstance(fanout_dist, FanoutDist) else fanout_dist
    rng = random.Random(seed)
    w = max(1, round(n_gates / depth))
    n_pi = max(2, -(-w // 8))
    p_far = min(max(0.6 * (rent_exponent - 0.5), 0.02), 0.35)
    mix = _solve_fanin_mix(dist.mean, w * depth, w, n_pi)

    pins = [Pin(f"pi{i}", "in", f"npi{i}") for i in range(n_pi)]
    regs = {}
    gates = {}
    for i in range(w):
        rid = f"ri{i}"
        regs[rid] = Reg(rid, d=f"npi{i % n_pi}", q=f"nri{i}")
    stages = [[f"nri{i}" for i in range(w)]]  # driver nets per stage

    gid = 0
    for s in range(1, depth + 1):
        prev = stages[-1]
        stage_nets = []
        fanins = []
        for _ in range(w):
            u = rng.random()
            k = 1 if u < mix[0] else (2 if u < mix[0] + mix[1] else 3)
            fanins.append(k)
        # allocate input pin slots to drivers: weighted by sampled fanout,
        # optionally rerouted to an earlier stage (Rent-style long edge)
        weights = [dist.sample(rng) for _ in prev]
        choices = list(range(len(prev)))
        slot_drivers = []
        for k in fanins:
            for _ in range(k):
                if len(stages) > 1 and rng.random() < p_far:
                    back = min(1 + int(rng.expovariate(1.0)), len(stages) - 1)
                    far_stage = stages[-1 - back]
                    slot_drivers.append(far_stage[rng.randrange(len(far_stage))])
                else:
                    slot_drivers.append(prev[rng.choices(choices, weights=weights)[0]])
        # guarantee every prev-stage driver at least one sink: steal a slot
        # that still has a duplicate or long-edge driver, else add a slot
        counts = {}
        for d in slot_drivers:
            counts[d] = counts.get(d, 0) + 1
        for net in prev:
            if net in counts:
                continue
            spot = next((i for i, d in enumerate(slot_drivers)
                         if counts[d] > 1 or d not in prev), None)
            if spot is None:
                slot_drivers.append(net)
            else:
                counts[slot_drivers[spot]] -= 1
                slot_drivers[spot] = net
            counts[net] = 1
        # cut gates from the slot list; input pins must be distinct nets
        pos = 0
        while pos < len(slot_drivers):
            k = fanins[len(stage_nets) % len(fanins)]
            take = slot_drivers[pos:pos + k]
            pos += len(take)
            seen = []
            for d in take:
                if d not in seen:
                    seen.append(d)
            if len(seen) < len(take):
                pool = [x for x in prev if x not in seen]
                seen.extend(pool[:len(take) - len(seen)])
            k_eff = len(seen)
            cell = _K_CLASSES[k_eff][rng.randrange(len(_K_CLASSES[k_eff]))]
            out = f"n{s}_{gid}"
            gates[f"g{gid}"] = Gate(f"g{gid}", f"{cell}_X1", tuple(seen), out)
            stage_nets.append(out)
            gid += 1
        stages.append(stage_nets)

    # capture every final-stage output; earlier stages are fully sunk already
    for i, net in enumerate(stages[-1]):
        rid = f"ro{i}"
        regs[rid] = Reg(rid, d=net, q=f"nro{i}")
        pins.append(Pin(f"po{i}", "out", f"nro{i}"))
    return Netlist(gates=gates, regs=regs, pins=pins, depth=depth)


# --- text format -------------------------------------------------------------

def serialize_netlist(nl: Netlist) -> str:
    lines = []
    for p in nl.pins:
        if p.direction == "in":
            lines.append(f"pin {p.name} dir=in net={p.net}")
    for rid in sorted(nl.regs, key=_natural):
        r = nl.regs[rid]
        lines.append(f"reg {r.id} d={r.d} q={r.q}")
    for gid in sorted(nl.gates, key=_natural):
        g = nl.gates[gid]
        lines.append(f"gate {g.id} {g.cell} in={','.join(g.inputs)} out={g.output}")
    for p in nl.pins:
        if p.direction == "out":
            lines.append(f"pin {p.name} dir=out net={p.net}")
    return "\n".join(lines) + "\n"


def _natural(s):
    import re
    return [int(t) if t.isdigit() else t for t in re.split(r"(\d+)", s)]


def save_netlist(nl: Netlist, path) -> None:
    with open(path, "w") as fh:
        fh.write(serialize_netlist(nl))


def load_netlist(path) -> Netlist:
    gates, regs, pins = {}, {}, []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tok = line.split()
            where = f"{path}:{lineno}"
            try:
                if tok[0] == "gate":
                    kv = dict(t.split("=", 1) for t in tok[3:])
                    gates[tok[1]] = Gate(tok[1], tok[2],
                                         tuple(kv["in"].split(",")), kv["out"])
                elif tok[0] == "reg":
                    kv = dict(t.split("=", 1) for t in tok[2:])
                    regs[tok[1]] = Reg(tok[1], kv["d"], kv["q"])
                elif tok[0] == "pin":
                    kv = dict(t.split("=", 1) for t in tok[2:])
                    pins.append(Pin(tok[1], kv["dir"], kv["net"]))
                else:
                    raise SchemaError(f"{where}: unknown record {tok[0]!r}")
            except (KeyError, IndexError, ValueError) as exc:
                raise SchemaError(f"{where}: malformed record: {line!r}") from exc
    if not regs:
        raise SchemaError(f"{path}: netlist has no registers")
    return Netlist(gates=gates, regs=regs, pins=pins, depth=0)
