"""Interconnect technology stack: wires, vias and contacts.

Size-dependent copper resistivity follows the combined grain-boundary plus
surface-scattering closed form

    rho = rho0 * [ (1/3) / (1/3 - a/2 + a^2 - a^3*ln(1+1/a))
                   + (3/8)*(1-p)*lambda*(w+t)/(w*t) ],   a = lambda*R/(d*(1-R))

with grain size d taken equal to the wire width. Wire capacitance is a
two-plate approximation (lateral to the neighbor at minimum spacing plus
vertical to the next level through an ILD of the wire's own thickness)
times a single fringe factor. The wire-resistance multiplier x_rw scales
final R per um of the signal layers; a flag extends it to vias.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .errors import KindError, ParameterError, SchemaError
from .units import EPS0_F_PER_M, UOHM_CM_TO_OHM_M

SIGNAL_LAYERS = ("M2", "M3", "M4", "M5", "M6")


@dataclass(frozen=True)
class LayerSpec:
    name: str
    kind: str  # wire | via | meol
    min_width_nm: float
    min_spacing_nm: float
    thickness_nm: float
    k_ild: float
    resistivity_model: str = "steinhogl"  # or "bulk"

    def __post_init__(self):
        if self.kind not in ("wire", "via", "meol"):
            raise ParameterError(f"layer {self.name}: bad kind {self.kind!r}")
        if self.resistivity_model not in ("steinhogl", "bulk"):
            raise ParameterError(f"layer {self.name}: bad resistivity model")
        for attr in ("min_width_nm", "min_spacing_nm", "thickness_nm", "k_ild"):
            if not getattr(self, attr) > 0:
                raise ParameterError(f"layer {self.name}: {attr} must be > 0")


@dataclass(frozen=True)
class TechStack:
    layers: tuple[LayerSpec, ...]
    rho_bulk_uohm_cm: float = 1.9
    mfp_nm: float = 39.0          # electron mean free path lambda
    grain_reflectivity: float = 0.43
    specularity: float = 0.0
    rho_con_ohm_cm2: float = 1e-8
    x_rw: float = 1.0
    x_rw_applies_to_vias: bool = False
    fringe_factor: float = 1.15
    ild_height_factor: float = 1.0  # ILD height = factor * wire thickness

    def __post_init__(self):
        if not self.x_rw > 0:
            raise ParameterError(f"x_rw must be > 0, got {self.x_rw}")
        if not 0.0 <= self.grain_reflectivity < 1.0:
            raise ParameterError("grain reflectivity must lie in [0, 1)")
        if not 0.0 <= self.specularity <= 1.0:
            raise ParameterError("specularity must lie in [0, 1]")
        names = [l.name for l in self.layers]
        if len(set(names)) != len(names):
            raise ParameterError("duplicate layer names in stack")

    def layer(self, name: str) -> LayerSpec:
        for l in self.layers:
            if l.name == name:
                return l
        raise ParameterError(f"no layer named {name!r} in stack")

    def signal_layers(self) -> list[LayerSpec]:
        return [self.layer(n) for n in SIGNAL_LAYERS]


def cu_resistivity(width_nm: float, thickness_nm: float, stack: TechStack) -> float:
    """Size-dependent resistivity in uOhm*cm; approaches rho_bulk for large cross-sections."""
    if not (width_nm > 0 and thickness_nm > 0):
        raise ParameterError("width and thickness must be > 0")
    r = stack.grain_reflectivity
    lam = stack.mfp_nm
    alpha = lam * r / (width_nm * (1.0 - r))
    grain = 1.0
    if alpha > 0:
        c = 1.0 / 3.0 - alpha / 2.0 + alpha**2 - alpha**3 * math.log(1.0 + 1.0 / alpha)
        grain = (1.0 / 3.0) / c
    surface = 0.375 * (1.0 - stack.specularity) * lam * (width_nm + thickness_nm) / (width_nm * thickness_nm)
    return stack.rho_bulk_uohm_cm * (grain + surface)


def _layer_resistivity(layer: LayerSpec, stack: TechStack, w_nm: float, t_nm: float) -> float:
    if layer.resistivity_model == "bulk":
        return stack.rho_bulk_uohm_cm
    return cu_resistivity(w_nm, t_nm, stack)


def wire_rc_per_um(layer: LayerSpec, stack: TechStack) -> tuple[float, float]:
    """(R in Ohm/um, C in fF/um) for a minimum-pitch wire on this layer."""
    if layer.kind != "wire":
        raise KindError(f"layer {layer.name} is kind={layer.kind}, expected wire")
    w = layer.min_width_nm * 1e-9
    t = layer.thickness_nm * 1e-9
    rho = _layer_resistivity(layer, stack, layer.min_width_nm, layer.thickness_nm) * UOHM_CM_TO_OHM_M
    r_per_um = stack.x_rw * rho * 1e-6 / (w * t)
    s = layer.min_spacing_nm * 1e-9
    h_ild = stack.ild_height_factor * t
    # lateral plate to both neighbors + vertical plate up/down, per um of length
    c_per_m = stack.fringe_factor * (2.0 * EPS0_F_PER_M * layer.k_ild * t / s
                                     + 2.0 * EPS0_F_PER_M * layer.k_ild * w / h_ild)
    c_fF_per_um = c_per_m * 1e-6 * 1e15
    return r_per_um, c_fF_per_um


def via_resistance(layer: LayerSpec, stack: TechStack) -> float:
    """Resistance of one minimum-size via/cut on this layer, in Ohm."""
    if layer.kind not in ("via", "meol"):
        raise KindError(f"layer {layer.name} is kind={layer.kind}, expected via/meol")
    size = layer.min_width_nm
    rho = _layer_resistivity(layer, stack, size, size) * UOHM_CM_TO_OHM_M
    r = rho * (layer.thickness_nm * 1e-9) / (size * 1e-9) ** 2
    if stack.x_rw_applies_to_vias and layer.kind == "via":
        r *= stack.x_rw  # BEOL vias only; MEOL locals are never scaled
    return r


def contact_resistance(rho_con: float, l_con: float, w: float) -> float:
    """Source/drain contact resistance rho_con/(L_CON*W) in Ohm.

    rho_con in Ohm*cm^2, l_con in nm, w in um. Assumes the contact is much
    shorter than the transfer length.
    """
    if not (rho_con > 0 and l_con > 0 and w > 0):
        raise ParameterError("rho_con, l_con and w must be > 0")
    return rho_con / ((l_con * 1e-7) * (w * 1e-4))


def scale_wire_resistance(stack: TechStack, x_rw: float, include_vias: bool | None = None) -> TechStack:
    """Return a stack whose wire-resistance multiplier is composed with x_rw."""
    if not x_rw > 0:
        raise ParameterError(f"x_rw must be > 0, got {x_rw}")
    vias = stack.x_rw_applies_to_vias if include_vias is None else include_vias
    return replace(stack, x_rw=stack.x_rw * x_rw, x_rw_applies_to_vias=vias)


# --- ITF-like stack file ----------------------------------------------------

_HEADER_KEYS = ("rho_bulk_uohm_cm", "mfp_nm", "grain_R", "specularity", "rho_con_ohm_cm2")
_LAYER_KEYS = ("kind", "min_width_nm", "min_spacing_nm", "thickness_nm", "k_ild")


def _parse_kv(tokens, allowed, where):
    vals = {}
    for tok in tokens:
        if "=" not in tok:
            raise SchemaError(f"{where}: expected key=value, got {tok!r}")
        key, _, val = tok.partition("=")
        if key not in allowed:
            raise SchemaError(f"{where}: unknown key {key!r}")
        if key in vals:
            raise SchemaError(f"{where}: duplicate key {key!r}")
        vals[key] = val
    missing = set(allowed) - set(vals)
    if missing:
        raise SchemaError(f"{where}: missing keys {sorted(missing)}")
    return vals


def parse_itf(text: str, source: str = "<itf>") -> TechStack:
    """Parse the line-oriented stack description (see save_itf for the grammar)."""
    header = None
    layers = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        where = f"{source}:{lineno}"
        if tokens[0] == "stack":
            if header is not None:
                raise SchemaError(f"{where}: duplicate stack header")
            header = _parse_kv(tokens[1:], _HEADER_KEYS, where)
        elif tokens[0] == "layer":
            if len(tokens) < 2:
                raise SchemaError(f"{where}: layer record needs a name")
            name = tokens[1]
            vals = _parse_kv(tokens[2:], _LAYER_KEYS, where)
            layers.append(LayerSpec(
                name=name, kind=vals["kind"],
                min_width_nm=float(vals["min_width_nm"]),
                min_spacing_nm=float(vals["min_spacing_nm"]),
                thickness_nm=float(vals["thickness_nm"]),
                k_ild=float(vals["k_ild"])))
        else:
            raise SchemaError(f"{where}: unknown record {tokens[0]!r}")
    if header is None:
        raise SchemaError(f"{source}: missing stack header")
    if not layers:
        raise SchemaError(f"{source}: no layer records")
    return TechStack(
        layers=tuple(layers),
        rho_bulk_uohm_cm=float(header["rho_bulk_uohm_cm"]),
        mfp_nm=float(header["mfp_nm"]),
        grain_reflectivity=float(header["grain_R"]),
        specularity=float(header["specularity"]),
        rho_con_ohm_cm2=float(header["rho_con_ohm_cm2"]))


def load_itf(path) -> TechStack:
    with open(path) as fh:
        return parse_itf(fh.read(), source=str(path))


def save_itf(stack: TechStack, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"stack rho_bulk_uohm_cm={stack.rho_bulk_uohm_cm:g} "
                 f"mfp_nm={stack.mfp_nm:g} grain_R={stack.grain_reflectivity:g} "
                 f"specularity={stack.specularity:g} "
                 f"rho_con_ohm_cm2={stack.rho_con_ohm_cm2:g}\n")
        for l in stack.layers:
            fh.write(f"layer {l.name} kind={l.kind} min_width_nm={l.min_width_nm:g} "
                     f"min_spacing_nm={l.min_spacing_nm:g} thickness_nm={l.thickness_nm:g} "
                     f"k_ild={l.k_ild:g}\n")


def default_stack() -> TechStack:
    """The bundled projected 5-nm stack (min widths 12/18/24 nm by level)."""
    from importlib.resources import files

    text = (files("dispel") / "data" / "stack_5nm.itf").read_text()
    return parse_itf(text, source="dispel/data/stack_5nm.itf")
