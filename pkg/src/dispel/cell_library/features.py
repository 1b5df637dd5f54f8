"""Logic-feature extraction from fan-out-of-3 gate chains.

For each of the six canonical gates, a 4-stage chain of identical X1 cells
is simulated, each stage driving three copies of itself; the third stage is
measured once its input slew has settled through the first two stages.
Five quantities per gate: pull-up/pull-down drive currents, rising and
falling propagation delays, and the average switching energy per event.
"""

from __future__ import annotations

import numpy as np

from ..errors import FeatureError
from .characterize import CellLibrary, simulate_arc
from .geometry import CANONICAL_GATES

FO3_FANOUT = 3
FO3_STAGES = 4
FO3_MEASURE_STAGE = 3  # 1-based


def fo3_features(library: CellLibrary, v_dd: float | None = None) -> list:
    """30 numbers: [ion_up, ion_down, delay_rise, delay_fall, energy] per gate."""
    if v_dd is not None and abs(v_dd - library.v_dd) > 1e-12:
        raise FeatureError(f"library characterized at {library.v_dd} V, asked for {v_dd} V")
    vdd = library.v_dd
    features = []
    for gate in CANONICAL_GATES:
        name = f"{gate}_X1"
        if name not in library.cells:
            raise FeatureError(f"gate {name} missing from library")
        ct = library.cells[name]
        load = FO3_FANOUT * ct.pin_caps_fF[ct.input_pins[0]]
        slew = library.nominal_slew_ps
        # settle the slew through the stages ahead of the measured one
        rising = True
        for _ in range(FO3_MEASURE_STAGE - 1):
            _, s, _ = simulate_arc(library.vs_n, library.vs_p, ct.elec, vdd,
                                   np.array([slew]), np.array([load]),
                                   out_rising=rising, arc_id=f"{name}/fo3")
            slew = float(s[0])
            if ct.inverting:
                rising = not rising
        d_r, _, e_r = simulate_arc(library.vs_n, library.vs_p, ct.elec, vdd,
                                   np.array([slew]), np.array([load]),
                                   out_rising=True, arc_id=f"{name}/fo3-rise")
        d_f, _, e_f = simulate_arc(library.vs_n, library.vs_p, ct.elec, vdd,
                                   np.array([slew]), np.array([load]),
                                   out_rising=False, arc_id=f"{name}/fo3-fall")
        features.extend([
            ct.i_on_up_uA,
            ct.i_on_down_uA,
            float(d_r[0]),
            float(d_f[0]),
            0.5 * (float(e_r[0]) + float(e_f[0])),
        ])
    return features
