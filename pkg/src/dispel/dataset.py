"""Frozen feature-vector schema and CSV I/O for the surrogate dataset.

41 features per row: 30 logic features (six gates x five quantities, gate-
major), 9 interconnect features (R and C of M2/M4/M6, R of V1/V3/V5 -- via
capacitances are negligible and deliberately absent), then the supply
voltage and the achieved frequency. Two labels: core energy and cell area.
"""

from __future__ import annotations

import csv

from .errors import SchemaError

_GATE_ORDER = ("inv", "nand2", "nand3", "nor2", "nor3", "aoi21")
_QUANTITIES = ("ion_up_uA", "ion_down_uA", "delay_rise_ps", "delay_fall_ps",
               "energy_fJ")

LOGIC_COLUMNS = tuple(f"{g}_{q}" for g in _GATE_ORDER for q in _QUANTITIES)
INTERCONNECT_COLUMNS = ("r_m2_ohm_um", "c_m2_fF_um", "r_m4_ohm_um", "c_m4_fF_um",
                        "r_m6_ohm_um", "c_m6_fF_um", "r_v1_ohm", "r_v3_ohm",
                        "r_v5_ohm")
FEATURE_COLUMNS = LOGIC_COLUMNS + INTERCONNECT_COLUMNS + ("vdd_V", "f_ach_GHz")
LABEL_COLUMNS = ("label_energy_pJ", "label_area_um2")
ALL_COLUMNS = FEATURE_COLUMNS + LABEL_COLUMNS

N_FEATURES = len(FEATURE_COLUMNS)
F_ACH_INDEX = FEATURE_COLUMNS.index("f_ach_GHz")
VDD_INDEX = FEATURE_COLUMNS.index("vdd_V")
R_WIRE_INDICES = tuple(FEATURE_COLUMNS.index(c)
                       for c in ("r_m2_ohm_um", "r_m4_ohm_um", "r_m6_ohm_um"))


def save_features_csv(rows, path, header_comment: str | None = None) -> None:
    """rows: iterable of (features[41], label_energy, label_area)."""
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        w = csv.writer(fh)
        w.writerow(ALL_COLUMNS)
        for features, e, a in rows:
            if len(features) != N_FEATURES:
                raise SchemaError(f"feature row has {len(features)} values, "
                                  f"expected {N_FEATURES}")
            w.writerow([repr(float(x)) for x in features] + [repr(float(e)), repr(float(a))])


def load_features_csv(path):
    """Returns (features list-of-lists, energies, areas)."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    if not rows:
        raise SchemaError(f"{path}: empty dataset")
    header = tuple(c.strip() for c in rows[0])
    if header != ALL_COLUMNS:
        bad = next((i for i, (a, b) in enumerate(zip(header, ALL_COLUMNS)) if a != b),
                   min(len(header), len(ALL_COLUMNS)))
        raise SchemaError(f"{path}: column {bad} is "
                          f"{header[bad] if bad < len(header) else '<missing>'!r}, "
                          f"expected {ALL_COLUMNS[bad] if bad < len(ALL_COLUMNS) else '<none>'!r}")
    feats, energies, areas = [], [], []
    for lineno, row in enumerate(rows[1:], 2):
        if len(row) != len(ALL_COLUMNS):
            raise SchemaError(f"{path}:{lineno}: expected {len(ALL_COLUMNS)} columns")
        vals = [float(x) for x in row]
        feats.append(vals[:N_FEATURES])
        energies.append(vals[N_FEATURES])
        areas.append(vals[N_FEATURES + 1])
    return feats, energies, areas
