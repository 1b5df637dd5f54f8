#!/usr/bin/env python3
"""Run the bundled example energy-frequency sweep and plot the frontier."""

import argparse
import os
import subprocess
import sys

HERE = os.path.dirname(os.path.abspath(__file__))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/default_sweep")
    ap.add_argument("--config", default=os.path.join(HERE, "..", "configs",
                                                     "example_sweep.cfg"))
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    run = [sys.executable, "-m", "dispel.cli"]
    subprocess.run(run + ["sweep", "--config", args.config, "--out", args.out],
                   check=True)
    subprocess.run(run + ["plot", "--in", os.path.join(args.out, "frontier.csv"),
                          "--kind", "ef",
                          "--out", os.path.join(args.out, "ef_curve.svg")],
                   check=True)
    subprocess.run(run + ["plot", "--in", os.path.join(args.out, "results.csv"),
                          "--kind", "area-f",
                          "--out", os.path.join(args.out, "area_vs_f.svg")],
                   check=True)
    print(f"outputs in {args.out}")


if __name__ == "__main__":
    main()
