#!/usr/bin/env python3
"""Train energy and area surrogates on a feature CSV and dump analysis
reports (first-layer weights, pivot-neuron traces, Softplus/ReLU compare)."""

import argparse
import os
import subprocess
import sys


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--data", default="out/dataset/features.csv")
    ap.add_argument("--out", default="out/surrogate")
    ap.add_argument("--epochs", type=int, default=50000)
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    run = [sys.executable, "-m", "dispel.cli"]
    for target in ("energy", "area"):
        model = os.path.join(args.out, f"model_{target}.txt")
        subprocess.run(run + ["train-nn", "--data", args.data, "--target", target,
                              "--out", model, "--epochs", str(args.epochs)],
                       check=True)
        for mode in ("weights", "pivot"):
            subprocess.run(run + ["analyze-nn", "--model", model, "--mode", mode,
                                  "--data", args.data,
                                  "--out", os.path.join(args.out, f"{target}_{mode}.json")],
                           check=True)
    model = os.path.join(args.out, "model_energy.txt")
    subprocess.run(run + ["analyze-nn", "--model", model, "--mode", "relu-compare",
                          "--data", args.data, "--epochs", "5000",
                          "--out", os.path.join(args.out, "relu_compare.json")],
                   check=True)
    print(f"outputs in {args.out}")


if __name__ == "__main__":
    main()
