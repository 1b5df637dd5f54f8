"""Cell geometry scaling and MEOL parasitic estimation.

Cell width is n_fingers * CGP plus one pitch of edge allowance; height is
the track count times the M2 pitch. The pitch decomposes exactly as
CGP = l_gate + 2*l_spa + l_con. The relaxed DRC only requires that no two
same-layer rectangles touch or overlap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from ..errors import DecompositionError, DrcError, ParameterError
from ..interconnect import TechStack, contact_resistance, via_resistance
from ..units import EPS0_F_PER_M

# canonical gate order; frozen because the feature-vector schema depends on it
CANONICAL_GATES = ("INV", "NAND2", "NAND3", "NOR2", "NOR3", "AOI21")
DRIVE_SIZES = (1, 2, 4, 8)


@dataclass(frozen=True)
class CellTemplate:
    """Electrical archetype of a gate: stack heights set the worst-case
    series transistor count on the measured arc."""

    name: str
    n_inputs: int
    pu_stack: int
    pd_stack: int
    inverting: bool = True


GATE_TEMPLATES = {
    "INV": CellTemplate("INV", 1, 1, 1),
    "NAND2": CellTemplate("NAND2", 2, 1, 2),
    "NAND3": CellTemplate("NAND3", 3, 1, 3),
    "NOR2": CellTemplate("NOR2", 2, 2, 1),
    "NOR3": CellTemplate("NOR3", 3, 3, 1),
    "AOI21": CellTemplate("AOI21", 3, 2, 2),
    "BUF": CellTemplate("BUF", 1, 1, 1, inverting=False),
    "DFF": CellTemplate("DFF", 2, 1, 1),  # D and CK pins
}


@dataclass(frozen=True)
class CellDims:
    """Technology-level dimensional parameters shared by every cell."""

    cgp: float = 36.0        # contacted gate pitch, nm
    m2_pitch: float = 24.0   # nm
    l_gate: float = 10.0     # nm
    l_spa: float = 8.0       # gate spacer length, nm
    l_con: float = 10.0      # source/drain contact length, nm
    tracks: float = 6.5
    structure: str = "planar"      # planar | finfet
    device_width_nm: float = 60.0  # per finger (planar footprint)
    fin_width_nm: float = 5.0
    fin_height_nm: float = 30.0
    fin_pitch_nm: float = 21.0
    n_fins: int = 3
    k_spacer: float = 4.5
    gate_height_nm: float = 40.0
    epi_height_nm: float = 30.0    # raised S/D facing the gate (finfet only)
    meol_cap_fF_per_um: float = 0.05  # cell-internal wiring cap per um of width

    def __post_init__(self):
        if self.structure not in ("planar", "finfet"):
            raise ParameterError(f"structure must be planar or finfet, got {self.structure!r}")

    def w_eff_per_finger_um(self) -> float:
        """Gated width per finger in um; fins count both sidewalls and the top."""
        if self.structure == "finfet":
            return self.n_fins * (2.0 * self.fin_height_nm + self.fin_width_nm) * 1e-3
        return self.device_width_nm * 1e-3

    def w_footprint_per_finger_um(self) -> float:
        """Planar footprint width per finger in um (spacer flank width)."""
        if self.structure == "finfet":
            return self.n_fins * self.fin_pitch_nm * 1e-3
        return self.device_width_nm * 1e-3


@dataclass(frozen=True)
class CellGeometry:
    cell_name: str
    n_fingers: int
    dims: CellDims

    @property
    def width_nm(self) -> float:
        return (self.n_fingers + 1) * self.dims.cgp

    @property
    def height_nm(self) -> float:
        return self.dims.tracks * self.dims.m2_pitch

    @property
    def area_um2(self) -> float:
        return self.width_nm * self.height_nm * 1e-6

    def rectangles(self):
        """(layer, x0, x1) 1-D rectangles along the pitch axis for the DRC check.

        Gate fingers sit at pitch CGP; contacts fill the space between and
        outside them. The y extent is common, so overlap is 1-D.
        """
        d = self.dims
        rects = []
        half_con = d.l_con / 2.0
        for i in range(self.n_fingers):
            gx = (i + 1) * d.cgp  # gate center
            rects.append(("poly", gx - d.l_gate / 2.0, gx + d.l_gate / 2.0))
        for i in range(self.n_fingers + 1):
            cx = (i + 0.5) * d.cgp  # contact center between gates
            rects.append(("contact", cx - half_con, cx + half_con))
        return rects


def scale_layout(template: CellTemplate, dims: CellDims, size: int = 1) -> CellGeometry:
    """Instantiate a gate at the given drive size and check geometric validity."""
    d = dims
    if min(d.l_gate, d.l_spa, d.l_con) <= 0:
        raise DecompositionError(
            f"{template.name}: all of l_gate/l_spa/l_con must be > 0 "
            f"(got {d.l_gate}/{d.l_spa}/{d.l_con})")
    total = d.l_gate + 2.0 * d.l_spa + d.l_con
    if abs(total - d.cgp) > 1e-9:
        raise DecompositionError(
            f"{template.name}: l_gate + 2*l_spa + l_con = {total} != cgp = {d.cgp}")
    fingers = 8 if template.name == "DFF" else template.n_inputs * size
    geom = CellGeometry(cell_name=f"{template.name}_X{size}" if template.name != "DFF" else "DFF",
                        n_fingers=fingers, dims=d)
    _drc_check(geom)
    return geom


def _drc_check(geom: CellGeometry) -> None:
    by_layer: dict[str, list[tuple[float, float]]] = {}
    for layer, x0, x1 in geom.rectangles():
        by_layer.setdefault(layer, []).append((x0, x1))
    for layer, rects in by_layer.items():
        rects.sort()
        for (a0, a1), (b0, b1) in zip(rects, rects[1:]):
            if b0 <= a1 + 1e-12:  # touching counts as a violation
                raise DrcError(f"{geom.cell_name}: {layer} shapes touch/overlap "
                               f"([{a0:g},{a1:g}] vs [{b0:g},{b1:g}])")


@dataclass(frozen=True)
class MEOLParasitics:
    """Cell-level middle-end parasitics for the composite switching device."""

    r_con: float           # effective contact resistance, Ohm
    r_meol_series: float   # TS/MA/MB series resistance, Ohm
    c_g2c: float           # total gate-to-contact coupling cap (both flanks), fF
    c_meol_other: float    # remaining cell-internal wiring cap, fF


def effective_contact_resistance(r_single: float, n_fingers: int, shared: bool) -> float:
    """Total effective contact resistance of a multi-finger device.

    With alternating shared contacts, two fingers push their summed current
    through one contact, which doubles the drop per finger compared with one
    contact per finger.
    """
    if n_fingers < 1:
        raise ParameterError("n_fingers must be >= 1")
    if n_fingers == 1 or not shared:
        return r_single / n_fingers
    fingers_per_contact = 2.0
    return fingers_per_contact * r_single / n_fingers


def extract_meol(geom: CellGeometry, stack: TechStack) -> MEOLParasitics:
    """Estimate MEOL parasitics from the scaled geometry and the stack."""
    d = geom.dims
    w_flank = d.w_footprint_per_finger_um()
    r_single = contact_resistance(stack.rho_con_ohm_cm2, d.l_con, geom.dims.w_eff_per_finger_um())
    r_con = effective_contact_resistance(r_single, geom.n_fingers, shared=geom.n_fingers > 1)

    r_meol = 0.0
    for layer in stack.layers:
        if layer.kind == "meol":
            r_meol += via_resistance(layer, stack)

    # parallel-plate flank per finger, both flanks (source and drain side)
    flank_area_m2 = (d.gate_height_nm * 1e-9) * (w_flank * 1e-6)
    c_flank = 2.0 * EPS0_F_PER_M * d.k_spacer * flank_area_m2 / (d.l_spa * 1e-9)
    if d.structure == "finfet":
        epi_area_m2 = (d.epi_height_nm * 1e-9) * (w_flank * 1e-6)
        c_flank += 2.0 * EPS0_F_PER_M * d.k_spacer * epi_area_m2 / (d.l_spa * 1e-9)
    # n and p device rows both contribute
    c_g2c_fF = c_flank * 1e15 * geom.n_fingers * 2.0

    c_other = d.meol_cap_fF_per_um * geom.width_nm * 1e-3
    return MEOLParasitics(r_con=r_con, r_meol_series=r_meol, c_g2c=c_g2c_fF,
                          c_meol_other=c_other)
