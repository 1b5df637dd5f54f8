"""Command-line entry point tying the pipeline together.

Subcommands: fit-device, characterize, run-flow, sweep, train-nn, predict,
analyze-nn, plot. Every command is deterministic given --seed and its
inputs; output CSVs carry the run-manifest hash in a header comment.
Exit codes: 0 ok, 2 configuration/schema error, 3 numeric/convergence
error, 4 I/O error. DISPEL_THREADS caps sweep parallelism.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import time
from dataclasses import asdict, fields, replace

import numpy as np

from . import __version__
from .cell_library import CellDims, build_library, load_library, save_library
from .dataset import (ALL_COLUMNS, F_ACH_INDEX, N_FEATURES, load_features_csv,
                      save_features_csv)
from .design_flow import (FlowConfig, RESULT_COLUMNS, generate_netlist,
                          load_netlist, run_flow, save_netlist)
from .errors import ConfigError, DispelError, NumericError, ParameterError, SchemaError
from .interconnect import default_stack, load_itf
from .nn_predictor import (TrainConfig, analyze_weights, build_mlp, find_pivot,
                           grad_check, ion_delay_sign_agreement, load_model,
                           predict, predict_batch, relu_compare, save_model, train)
from .svgplot import render_xy
from .sweep import (DevicePair, ResultStore, SweepConfig, ef_sweep, emit_dataset,
                    pareto_frontier, write_frontier_csv, write_results_csv)
from .vsdevice import fit_iv, load_iv_csv, load_params, save_params


def _bundled(name):
    from importlib.resources import files
    return files("dispel") / "data" / name


def _load_stack(spec: str):
    if spec == "default":
        return default_stack()
    return load_itf(spec)


def _load_device(spec: str):
    if spec.startswith("builtin:"):
        name = spec.split(":", 1)[1]
        path = _bundled(f"{name}.params")
        if not path.is_file():
            raise ConfigError(f"no builtin device {name!r}")
        import tempfile
        with tempfile.NamedTemporaryFile("w", suffix=".params", delete=False) as tmp:
            tmp.write(path.read_text())
        try:
            return load_params(tmp.name)
        finally:
            os.unlink(tmp.name)
    return load_params(spec)


def _parse_kv(text: str) -> dict:
    out = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise ConfigError(f"expected key=value, got {item!r}")
        k, _, v = item.partition("=")
        out[k.strip()] = v.strip()
    return out


def _dims_from_kv(kv: dict) -> CellDims:
    kwargs = {}
    valid = {f.name for f in fields(CellDims)}
    alias = {"tracks_n": "tracks"}
    for k, v in kv.items():
        k = alias.get(k, k)
        if k not in valid:
            raise ConfigError(f"unknown cell dimension {k!r}")
        if k == "structure":
            kwargs[k] = v
        elif k == "n_fins":
            kwargs[k] = int(v)
        else:
            kwargs[k] = float(v)
    return CellDims(**kwargs)


def _parse_grid(text: str):
    """`a:b:step` ranges or comma lists."""
    text = text.strip()
    if ":" in text:
        a, b, step = (float(t) for t in text.split(":"))
        if step <= 0:
            raise ConfigError(f"grid step must be > 0 in {text!r}")
        out = []
        v = a
        while v <= b + 1e-9:
            out.append(round(v, 9))
            v += step
        return tuple(out)
    return tuple(float(t) for t in text.split(",") if t.strip())


def _manifest(command: str, args_dict: dict, input_paths: list, outputs: list,
              seed: int):
    skip = {"fn", "out"} | {k for k, v in args_dict.items()
                            if isinstance(v, str) and v in {str(p) for p in input_paths}}
    blob = {"command": command,
            "args": {k: str(v) for k, v in sorted(args_dict.items()) if k not in skip},
            "inputs": {}}
    for p in input_paths:
        try:
            with open(p, "rb") as fh:
                blob["inputs"][str(p)] = hashlib.sha256(fh.read()).hexdigest()[:16]
        except OSError:
            blob["inputs"][str(p)] = "unreadable"
    h = hashlib.sha256(json.dumps(blob, sort_keys=True).encode()).hexdigest()[:16]
    return {
        "command": command,
        "config_paths": [str(p) for p in input_paths],
        "seeds": [seed],
        "tool_version": __version__,
        "config_hash": h,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "output_paths": [str(o) for o in outputs],
    }


def _write_manifest(manifest, outdir_or_file):
    if os.path.isdir(outdir_or_file):
        path = os.path.join(outdir_or_file, "run_manifest.json")
    else:
        path = str(outdir_or_file) + ".manifest.json"
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)


# --- subcommands -------------------------------------------------------------

def cmd_fit_device(args):
    points = load_iv_csv(args.iv)
    kv = _parse_kv(args.fixed)
    fixed = {}
    for k, v in kv.items():
        if k == "polarity":
            fixed[k] = v
        else:
            fixed[k] = float(v)
    result = fit_iv(points, fixed)
    params = result.params
    if args.ballistic_scale != 1.0:
        params = replace(params, v=params.v * args.ballistic_scale,
                         mu=params.mu * args.ballistic_scale)
    save_params(params, args.out)
    man = _manifest("fit-device", vars(args), [args.iv], [args.out], args.seed)
    _write_manifest(man, args.out)
    print(f"fit rms_rel_error={result.rms_rel_error:.4g} n={result.n_points} -> {args.out}")
    return 0


def cmd_characterize(args):
    stack = _load_stack(args.tech)
    vs_n = _load_device(args.ndev)
    vs_p = _load_device(args.pdev)
    dims = _dims_from_kv(_parse_kv(args.dims)) if args.dims else CellDims()
    from .vsdevice import tune_vt
    vs_n = tune_vt(vs_n, args.i_off, args.vdd)
    vs_p = tune_vt(vs_p, args.i_off, args.vdd)
    lib = build_library(dims, stack, vs_n, vs_p, args.vdd)
    save_library(lib, args.out)
    man = _manifest("characterize", vars(args),
                    [p for p in (args.tech, args.ndev, args.pdev) if os.path.exists(p)],
                    [args.out], args.seed)
    _write_manifest(man, args.out)
    print(f"library {lib.lib_id}: {len(lib.cells)} cells at {args.vdd} V -> {args.out}")
    return 0


def cmd_run_flow(args):
    if bool(args.netlist) == bool(args.synth):
        raise ConfigError("give exactly one of --netlist or --synth")
    lib = load_library(args.lib)
    stack = _load_stack(args.tech)
    if args.netlist:
        netlist = load_netlist(args.netlist)
    else:
        kv = _parse_kv(args.synth)
        netlist = generate_netlist(int(kv.get("n_gates", 1000)),
                                   int(kv.get("depth", 16)),
                                   float(kv.get("fanout_mean", 2.2)),
                                   float(kv.get("rent", 0.6)),
                                   int(kv.get("seed", args.seed)))
    cfg = FlowConfig(seed=args.seed, moves_per_cell=args.moves_per_cell)
    res = run_flow(netlist, lib, stack, args.ftar, cfg)
    man = _manifest("run-flow", vars(args),
                    [p for p in (args.netlist, args.tech) if p and os.path.exists(p)],
                    [args.out or "-"], args.seed)
    row = res.csv_row()
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(f"# manifest={man['config_hash']}\n")
            w = csv.writer(fh)
            w.writerow(RESULT_COLUMNS)
            w.writerow(row)
        _write_manifest(man, args.out)
    print(",".join(RESULT_COLUMNS))
    print(",".join(str(v) for v in row))
    return 0


_SWEEP_KEYS = {
    "netlist.file", "netlist.n_gates", "netlist.depth", "netlist.fanout_mean",
    "netlist.rent", "tech.itf", "device.n", "device.p", "vdd", "ftar",
    "ftar_auto", "ftar_fine_step", "ftar_fine_span", "i_off_nA_um",
    "utilization", "x_rw", "x_rw_vias", "activity", "moves_per_cell", "seed",
} | {f"dims.{f.name}" for f in fields(CellDims)}


def _load_sweep_config(path):
    kv = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise SchemaError(f"{path}:{lineno}: expected key=value")
            k, _, v = line.partition("=")
            k = k.strip()
            if k not in _SWEEP_KEYS:
                raise SchemaError(f"{path}:{lineno}: unknown key {k!r}")
            kv[k] = v.strip()
    return kv


def cmd_sweep(args):
    kv = _load_sweep_config(args.config)
    seed = int(kv.get("seed", args.seed))
    dims_kv = {k.split(".", 1)[1]: v for k, v in kv.items() if k.startswith("dims.")}
    dims = _dims_from_kv(dims_kv) if dims_kv else CellDims()
    cfg = SweepConfig(
        vdd_grid=_parse_grid(kv.get("vdd", "0.5:0.9:0.1")),
        ftar_coarse=_parse_grid(kv.get("ftar", "1.0:3.0:0.2")),
        ftar_fine_step=float(kv.get("ftar_fine_step", 0.02)),
        ftar_fine_span=float(kv.get("ftar_fine_span", 0.1)),
        ftar_auto=kv.get("ftar_auto", "false").lower() in ("1", "true", "yes"),
        i_off_nA_um=float(kv.get("i_off_nA_um", 1.0)),
        utilization=float(kv.get("utilization", 0.60)),
        seed=seed,
        activity=float(kv.get("activity", 0.1)),
        moves_per_cell=int(kv.get("moves_per_cell", 1000)),
        dims=dims,
        n_gates=int(kv.get("netlist.n_gates", 5000)),
        depth=int(kv.get("netlist.depth", 24)),
        fanout_mean=float(kv.get("netlist.fanout_mean", 2.2)),
        rent_exponent=float(kv.get("netlist.rent", 0.6)),
    )
    tech = _load_stack(kv.get("tech.itf", "default"))
    x_rw = float(kv.get("x_rw", 1.0))
    if x_rw != 1.0:
        from .interconnect import scale_wire_resistance
        vias = kv.get("x_rw_vias", "false").lower() in ("1", "true", "yes")
        tech = scale_wire_resistance(tech, x_rw, include_vias=vias)
    devices = DevicePair(n=_load_device(kv.get("device.n", "builtin:mos2_n")),
                         p=_load_device(kv.get("device.p", "builtin:bp_p")))
    if "netlist.file" in kv:
        netlist = load_netlist(kv["netlist.file"])
    else:
        netlist = generate_netlist(cfg.n_gates, cfg.depth, cfg.fanout_mean,
                                   cfg.rent_exponent, seed)

    os.makedirs(args.out, exist_ok=True)
    store = ResultStore()
    points = ef_sweep(cfg, tech, devices, netlist, store)
    man = _manifest("sweep", vars(args), [args.config], [args.out], seed)
    tag = f"manifest={man['config_hash']}"
    write_results_csv(store, os.path.join(args.out, "results.csv"), tag)
    write_frontier_csv(points, os.path.join(args.out, "frontier.csv"), tag)
    rows = emit_dataset(points, store)
    save_features_csv(rows, os.path.join(args.out, "features.csv"), tag)
    _write_manifest(man, args.out)
    save_netlist(netlist, os.path.join(args.out, "netlist.txt"))
    print(f"{len(store.results)} implementations, {len(rows)} frontier rows -> {args.out}")
    return 0


def cmd_train_nn(args):
    feats, energies, areas = load_features_csv(args.data)
    labels = energies if args.target == "energy" else areas
    model = build_mlp(activation=args.activation, seed=args.seed)
    cfg = TrainConfig(epochs=args.epochs, seed=args.seed, l2=args.l2,
                      learning_rate=args.lr, record_every=max(1, args.epochs // 2000))
    result = train(model, feats, labels, cfg)
    save_model(model, args.out)
    gerr = grad_check(model, model.rescale(np.asarray(feats[0])), labels[0])
    man = _manifest("train-nn", vars(args), [args.data], [args.out], args.seed)
    _write_manifest(man, args.out)
    print(f"target={args.target} best_epoch={result.best_epoch} "
          f"val_mse={result.best_val_mse:.6g} val_rmse={result.best_val_rmse:.4g} "
          f"val_rel_rmse={result.best_val_rel_rmse:.4g} grad_check={gerr:.2e} -> {args.out}")
    return 0


def cmd_predict(args):
    model = load_model(args.model)
    feats, energies, areas = load_features_csv(args.features)
    preds = predict_batch(model, feats)
    out = args.out
    lines = ["prediction"]
    for p in preds:
        lines.append(repr(float(p)))
    if out:
        man = _manifest("predict", vars(args), [args.model, args.features], [out],
                        args.seed)
        with open(out, "w") as fh:
            fh.write(f"# manifest={man['config_hash']}\n")
            fh.write("\n".join(lines) + "\n")
        _write_manifest(man, out)
    else:
        print("\n".join(lines))
    return 0


def cmd_analyze_nn(args):
    model = load_model(args.model)
    report = {}
    if args.mode == "weights":
        reps = analyze_weights(model)
        report = {
            "neurons": [{"neuron": r.neuron, "dominant_group": r.dominant_group,
                         "top": r.ranked[:8]} for r in reps],
            "ion_delay_opposite_sign_fraction": ion_delay_sign_agreement(model),
        }
    elif args.mode == "pivot":
        if not args.data:
            raise ConfigError("--mode pivot needs --data for the base feature row")
        feats, _, _ = load_features_csv(args.data)
        arr = np.asarray(feats)
        base = np.median(arr, axis=0)
        f_lo, f_hi = arr[:, F_ACH_INDEX].min(), arr[:, F_ACH_INDEX].max()
        grid = np.linspace(f_lo, f_hi, 81)
        rep = find_pivot(model, base, grid)
        report = {
            "f_grid": [float(f) for f in rep.f_grid],
            "always_inactive": rep.always_inactive,
            "always_active": rep.always_active,
            "transitioning": rep.transitioning,
            "strict_pivots": rep.strict_pivots,
        }
    elif args.mode == "relu-compare":
        if not args.data:
            raise ConfigError("--mode relu-compare needs --data")
        feats, energies, areas = load_features_csv(args.data)
        labels = energies if args.target == "energy" else areas
        arr = np.asarray(feats)
        base = np.median(arr, axis=0)
        grid = np.linspace(arr[:, F_ACH_INDEX].min(), arr[:, F_ACH_INDEX].max(), 81)
        cfg = TrainConfig(epochs=args.epochs, seed=args.seed,
                          record_every=max(1, args.epochs // 500))
        rep = relu_compare(feats, labels, base, grid, cfg)
        report = {
            "softplus_smoothness": rep.softplus_smoothness,
            "relu_smoothness": rep.relu_smoothness,
            "ratio_relu_over_softplus": rep.ratio,
        }
    text = json.dumps(report, indent=1, sort_keys=True, default=float)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def _read_csv_rows(path):
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    if len(rows) < 2:
        raise SchemaError(f"{path}: no data rows")
    header = [c.strip() for c in rows[0]]
    return header, [dict(zip(header, r)) for r in rows[1:]]


def cmd_plot(args):
    header, rows = _read_csv_rows(args.infile)

    def need(col):
        if col not in header:
            raise SchemaError(f"{args.infile}: missing column {col!r}")

    series = {}
    if args.kind == "ef":
        need("f_ach_GHz"), need("energy_pJ"), need("v_dd_V")
        for r in rows:
            series.setdefault(f"VDD {r['v_dd_V']} V", []).append(
                (float(r["f_ach_GHz"]), float(r["energy_pJ"])))
        labels = ("achieved frequency (GHz)", "energy per cycle (pJ)", "Pareto E-f")
    elif args.kind == "area-f":
        need("f_ach_GHz"), need("cell_area_um2"), need("v_dd_V")
        for r in rows:
            series.setdefault(f"VDD {r['v_dd_V']} V", []).append(
                (float(r["f_ach_GHz"]), float(r["cell_area_um2"])))
        labels = ("achieved frequency (GHz)", "cell area (um2)", "area vs frequency")
    elif args.kind == "edp-lspa":
        need("l_spa_nm"), need("min_edp_pJ_ns")
        series["min EDP"] = [(float(r["l_spa_nm"]), float(r["min_edp_pJ_ns"]))
                             for r in rows]
        labels = ("gate spacer length (nm)", "min energy-delay product (pJ*ns)",
                  "device structure optimization")
    elif args.kind == "edp-xrw":
        need("x_rw"), need("min_edp_pJ_ns")
        series["min EDP"] = [(float(r["x_rw"]), float(r["min_edp_pJ_ns"])) for r in rows]
        if "ro_baseline_edp" in header:
            series["fixed-wire RO"] = [(float(r["x_rw"]), float(r["ro_baseline_edp"]))
                                       for r in rows]
        labels = ("wire resistance multiplier", "min energy-delay product (pJ*ns)",
                  "wire resistance sensitivity")
    else:
        raise ConfigError(f"unknown plot kind {args.kind!r}")
    for pts in series.values():
        pts.sort(key=lambda p: p[0])
    svg = render_xy(series, labels[0], labels[1], labels[2])
    with open(args.out, "w") as fh:
        fh.write(svg + "\n")
    print(f"wrote {args.out}")
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="dispel",
                                 description="device-to-system performance evaluation")
    ap.add_argument("--seed", type=int, default=42, help="global RNG seed")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit-device", help="extract device parameters from I-V data")
    p.add_argument("--iv", required=True)
    p.add_argument("--fixed", required=True,
                   help="comma kv: l_gate=10,c_inv=4.36,ss=70[,polarity=n]")
    p.add_argument("--out", required=True)
    p.add_argument("--ballistic-scale", type=float, default=1.0,
                   help="scale extracted v and mu (projection knob)")
    p.set_defaults(fn=cmd_fit_device)

    p = sub.add_parser("characterize", help="build and dump a cell library")
    p.add_argument("--tech", required=True, help="ITF path or 'default'")
    p.add_argument("--ndev", required=True, help="device params path or builtin:<name>")
    p.add_argument("--pdev", required=True)
    p.add_argument("--dims", default="", help="comma kv of cell dimensions")
    p.add_argument("--vdd", type=float, required=True)
    p.add_argument("--i-off", type=float, default=1.0, help="leakage target nA/um")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_characterize)

    p = sub.add_parser("run-flow", help="one implementation point")
    p.add_argument("--netlist")
    p.add_argument("--synth", help="comma kv: n_gates=1000,depth=16,seed=1")
    p.add_argument("--lib", required=True)
    p.add_argument("--tech", required=True)
    p.add_argument("--ftar", type=float, required=True)
    p.add_argument("--moves-per-cell", type=int, default=200)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_run_flow)

    p = sub.add_parser("sweep", help="energy-frequency sweep from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("train-nn", help="train the performance surrogate")
    p.add_argument("--data", required=True)
    p.add_argument("--target", choices=("energy", "area"), required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=50000)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--activation", choices=("softplus", "relu"), default="softplus")
    p.set_defaults(fn=cmd_train_nn)

    p = sub.add_parser("predict", help="predict labels for feature rows")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_predict)

    p = sub.add_parser("analyze-nn", help="inspect a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--mode", choices=("weights", "pivot", "relu-compare"),
                   required=True)
    p.add_argument("--data")
    p.add_argument("--target", choices=("energy", "area"), default="energy")
    p.add_argument("--epochs", type=int, default=3000)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_analyze_nn)

    p = sub.add_parser("plot", help="SVG figure from a result CSV")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--kind", choices=("ef", "edp-lspa", "edp-xrw", "area-f"),
                   required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_plot)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"dispel: error code=2 kind={type(exc).__name__} msg={exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"dispel: error code=3 kind={type(exc).__name__} msg={exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"dispel: error code=4 kind={type(exc).__name__} msg={exc}", file=sys.stderr)
        return 4
    except DispelError as exc:
        print(f"dispel: error code=2 kind={type(exc).__name__} msg={exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
