#!/usr/bin/env python3
"""Generate the surrogate training dataset: sweep the stock technology
variants, keep only per-(technology, V_DD) Pareto-frontier points, and
write the 41-feature CSV. Parallelize with DISPEL_THREADS."""

import argparse
import os

from dispel.dataset import save_features_csv
from dispel.design_flow import generate_netlist
from dispel.interconnect import default_stack
from dispel.sweep import (DevicePair, SweepConfig, default_variants,
                          generate_dataset)
from dispel.vsdevice import load_params
from importlib.resources import files


def bundled(name):
    return str(files("dispel") / "data" / name)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/dataset/features.csv")
    ap.add_argument("--n-gates", type=int, default=150)
    ap.add_argument("--depth", type=int, default=8)
    ap.add_argument("--moves-per-cell", type=int, default=40)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()
    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)

    stack = default_stack()
    devices = DevicePair(n=load_params(bundled("mos2_n.params")),
                         p=load_params(bundled("bp_p.params")))
    netlist = generate_netlist(args.n_gates, args.depth, 2.2, 0.6, args.seed)
    cfg = SweepConfig(vdd_grid=(0.5, 0.6, 0.7, 0.8, 0.9), ftar_auto=True,
                      ftar_coarse=tuple(range(16)), ftar_fine_step=0.12,
                      ftar_fine_span=1.0, moves_per_cell=args.moves_per_cell,
                      seed=args.seed)
    rows, _ = generate_dataset(default_variants(), cfg, stack, devices, netlist)
    save_features_csv(rows, args.out, "surrogate training data")
    print(f"{len(rows)} frontier rows -> {args.out}")


if __name__ == "__main__":
    main()
