#!/usr/bin/env python3
"""Gate-spacer sweep at fixed CGP and gate length: min-EDP vs L_SPA.

Writes edp_lspa.csv (plot with `dispel plot --kind edp-lspa`) for the
copper baseline and optionally for a scaled-wire-resistance stack.
"""

import argparse
import csv
import os

from dispel.design_flow import generate_netlist
from dispel.interconnect import default_stack, scale_wire_resistance
from dispel.sweep import DevicePair, SweepConfig, device_opt
from dispel.vsdevice import load_params
from importlib.resources import files


def bundled(name):
    return str(files("dispel") / "data" / name)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/device_study")
    ap.add_argument("--n-gates", type=int, default=2000)
    ap.add_argument("--depth", type=int, default=20)
    ap.add_argument("--vdd", type=float, default=0.6)
    ap.add_argument("--x-rw", type=float, default=None,
                    help="also run with this wire multiplier (vias included)")
    ap.add_argument("--moves-per-cell", type=int, default=100)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)

    stack = default_stack()
    devices = DevicePair(n=load_params(bundled("mos2_n.params")),
                         p=load_params(bundled("bp_p.params")))
    netlist = generate_netlist(args.n_gates, args.depth, 2.2, 0.65, args.seed)
    cfg = SweepConfig(ftar_auto=True, ftar_coarse=tuple(range(6)),
                      ftar_fine_span=0.0, moves_per_cell=args.moves_per_cell,
                      seed=args.seed)
    grid = (4.0, 6.0, 8.0, 10.0, 12.0)

    runs = [("cu", stack)]
    if args.x_rw is not None:
        runs.append((f"xrw{args.x_rw:g}",
                     scale_wire_resistance(stack, args.x_rw, include_vias=True)))
    for tag, tech in runs:
        rows, argmin = device_opt(grid, cfg, tech, devices, netlist, args.vdd)
        path = os.path.join(args.out, f"edp_lspa_{tag}.csv")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["l_spa_nm", "l_con_nm", "min_edp_pJ_ns", "f_at_min_GHz",
                        "energy_at_min_pJ", "area_at_min_um2"])
            for r in rows:
                w.writerow([r.l_spa, r.l_con, r.min_edp_pJ_ns, r.f_at_min_GHz,
                            r.energy_at_min_pJ, r.area_at_min_um2])
        print(f"{tag}: argmin l_spa={argmin.l_spa} nm (l_con={argmin.l_con} nm) "
              f"-> {path}")


if __name__ == "__main__":
    main()
