#!/usr/bin/env python3
"""Wire-resistance multiplier sweep: min-EDP and area vs X_RW, plus the
fixed-wire ring-oscillator reference line. Plot with --kind edp-xrw."""

import argparse
import csv
import os

from dispel.design_flow import generate_netlist
from dispel.interconnect import default_stack
from dispel.sweep import DevicePair, SweepConfig, xrw_sweep
from dispel.vsdevice import load_params
from importlib.resources import files


def bundled(name):
    return str(files("dispel") / "data" / name)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/wire_study")
    ap.add_argument("--n-gates", type=int, default=2000)
    ap.add_argument("--depth", type=int, default=20)
    ap.add_argument("--vdd", type=float, default=0.6)
    ap.add_argument("--x-rw", default="0.1,0.25,0.5,1,2,4",
                    help="comma list of multipliers")
    ap.add_argument("--moves-per-cell", type=int, default=100)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)

    stack = default_stack()
    devices = DevicePair(n=load_params(bundled("mos2_n.params")),
                         p=load_params(bundled("bp_p.params")))
    netlist = generate_netlist(args.n_gates, args.depth, 2.2, 0.65, args.seed)
    cfg = SweepConfig(vdd_grid=(args.vdd,), ftar_auto=True,
                      ftar_coarse=tuple(range(8)), ftar_fine_span=0.0,
                      moves_per_cell=args.moves_per_cell, seed=args.seed)
    xs = tuple(float(t) for t in args.x_rw.split(","))
    rows = xrw_sweep(xs, cfg, stack, devices, netlist)
    path = os.path.join(args.out, "edp_xrw.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x_rw", "min_edp_pJ_ns", "area_at_min_um2", "area_at_ref_um2",
                    "ro_baseline_edp"])
        for r in rows:
            w.writerow([r.x_rw, r.min_edp_pJ_ns, r.area_at_min_um2,
                        r.area_at_ref_um2, r.ro_baseline_edp])
    print(f"-> {path}")


if __name__ == "__main__":
    main()
