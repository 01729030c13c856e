"""Command-line surface: ``analyze``, ``synth``, and ``bench`` subcommands.

Every report embeds the full run configuration and a content hash of its
inputs, so identical runs reproduce byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import baseline, detect, metrics, synth
from .errors import DqdvGpError, GridDoesNotReachThreshold
from .ingest import CsvSpec, parse_log, write_log, write_qv_csv
from .pipeline import analyze_curve, interior_mask, log_to_curves, paired_trial

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNASSESSABLE = 2


def _seed_default():
    env = os.environ.get("DQDV_GP_SEED")
    return int(env) if env else 0


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _add_ingest_flags(p):
    p.add_argument("--vmin", type=float, default=2.75)
    p.add_argument("--vmax", type=float, default=4.2)
    p.add_argument("--max-points", type=int, default=500)
    p.add_argument("--cc-tol", type=float, default=0.02)


def _add_analysis_flags(p):
    p.add_argument("--grid-n", type=int, default=400)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--threshold-v", type=float, default=4.0)
    p.add_argument("--prominence", type=float, default=0.05,
                   help="minimum peak prominence as a fraction of the mean's range")
    p.add_argument("--significance", choices=["band-separated", "mean-only"],
                   default="band-separated")


def _add_sg_flags(p):
    p.add_argument("--sg-window", type=int, default=11)
    p.add_argument("--sg-polyorder", type=int, default=2)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dqdv-gp",
        description="GP-based dQ/dV analysis and lithium-plating detection",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze", help="analyze charging logs and write reports")
    pa.add_argument("inputs", nargs="+", help="charging-log CSV files (.csv or .csv.gz)")
    pa.add_argument("--out", default="dqdv_out", help="output directory")
    _add_ingest_flags(pa)
    _add_analysis_flags(pa)
    _add_sg_flags(pa)
    pa.add_argument("--baseline", action="store_true",
                    help="also emit SG+finite-difference dQ/dV curves")
    pa.add_argument("--skip-cycles", type=int, default=0,
                    help="cycles excluded from the degradation-rate fit")
    pa.add_argument("--capacity", type=float, default=None,
                    help="nominal cell capacity in Ah (over-capacity warning)")
    pa.add_argument("--seed", type=int, default=_seed_default())

    ps = sub.add_parser("synth", help="generate synthetic charging logs")
    ps.add_argument("--out", default="synth_out")
    ps.add_argument("--scenario", choices=["plating", "baseline"], default="plating")
    ps.add_argument("--capacity", type=float, default=0.045)
    ps.add_argument("--noise-std", type=float, default=5e-6)
    ps.add_argument("--n-samples", type=int, default=300)
    ps.add_argument("--n-cycles", type=int, default=1)
    ps.add_argument("--fade-rate", type=float, default=0.0)
    ps.add_argument("--seed", type=int, default=_seed_default())

    pb = sub.add_parser("bench", help="paired GP-vs-SG benchmark on synthetic data")
    pb.add_argument("--out", default="bench_out")
    pb.add_argument("--scenario", choices=["plating", "baseline"], default="plating")
    pb.add_argument("--n-seeds", type=int, default=20)
    pb.add_argument("--noise-std", type=float, default=5e-6)
    pb.add_argument("--n-samples", type=int, default=300)
    pb.add_argument("--grid-n", type=int, default=400)
    _add_sg_flags(pb)
    pb.add_argument("--seed", type=int, default=_seed_default())
    return parser


def _config_dict(args):
    # the output directory is where the report lives, not part of the
    # analysis; leaving it out keeps identical runs byte-identical
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("command", "out")}
    cfg["command"] = args.command
    return cfg


def _make_spec(args):
    factory = synth.plating_spec if args.scenario == "plating" else synth.baseline_spec
    return factory(
        capacity=args.capacity if hasattr(args, "capacity") else 0.045,
        noise_std=args.noise_std,
        n_samples=args.n_samples,
        seed=args.seed,
        n_cycles=getattr(args, "n_cycles", 1),
        fade_rate=getattr(args, "fade_rate", 0.0),
    )


def cmd_analyze(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    config = _config_dict(args)
    status = EXIT_OK

    for path in args.inputs:
        stem = Path(path).name.removesuffix(".gz").removesuffix(".csv")
        log = parse_log(path)
        curves = log_to_curves(
            log,
            cc_tol=args.cc_tol,
            vmin=args.vmin,
            vmax=args.vmax,
            max_points=args.max_points,
            capacity_ah=args.capacity,
        )

        cycle_reports = []
        unassessable = []
        for curve in curves:
            tag = f"{stem}_cycle{curve.cycle}"
            write_qv_csv(curve, out / f"{tag}_qv.csv")
            try:
                model, post, report = analyze_curve(
                    curve,
                    grid_n=args.grid_n,
                    level=args.level,
                    threshold_v=args.threshold_v,
                    min_prominence_frac=args.prominence,
                    significance=args.significance,
                )
            except GridDoesNotReachThreshold as exc:
                unassessable.append({"cycle": curve.cycle, "reason": str(exc)})
                status = max(status, EXIT_UNASSESSABLE)
                continue

            with open(out / f"{tag}_dqdv_gp.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["voltage_v", "mean", "lower", "upper"])
                for row in zip(post.grid, post.mean, post.lower, post.upper):
                    w.writerow([repr(float(x)) for x in row])

            if args.baseline:
                cfg = baseline.SgConfig(
                    window=args.sg_window, polyorder=args.sg_polyorder,
                    resample_n=args.grid_n,
                )
                grid, dqdv = baseline.fd_dqdv(curve, cfg)
                with open(out / f"{tag}_dqdv_sg.csv", "w", newline="") as fh:
                    w = csv.writer(fh)
                    w.writerow(["voltage_v", "mean", "method"])
                    for vv, dd in zip(grid, dqdv):
                        w.writerow([repr(float(vv)), repr(float(dd)), "sg_fd"])

            cycle_reports.append(report.to_dict())

        doc = {
            "config": config,
            "input": {"path": str(path), "sha256": _sha256(path)},
            "cycles": cycle_reports,
            "unassessable": unassessable,
        }

        if len(curves) >= 2:
            series = metrics.throughput_series(curves)
            doc["throughput"] = {
                "cycles": [int(c) for c in series.cycles],
                "normalized": [float(x) for x in series.normalized],
                "rate_pct_per_cycle": metrics.degradation_rate(
                    series, skip_cycles=args.skip_cycles
                ),
            }
            with open(out / f"{stem}_throughput.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["cycle", "normalized_throughput"])
                for c, nt in zip(series.cycles, series.normalized):
                    w.writerow([int(c), repr(float(nt))])

        _write_json(out / f"{stem}_report.json", doc)
    return status


def cmd_synth(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    spec = _make_spec(args)
    log = synth.generate_log(spec)
    write_log(log, out / "log.csv")
    _write_json(out / "spec.json", {"config": _config_dict(args), "spec": spec.to_dict()})
    return EXIT_OK


def cmd_bench(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    base_spec = _make_spec(args)
    sg_cfg = baseline.SgConfig(
        window=args.sg_window, polyorder=args.sg_polyorder, resample_n=args.grid_n
    )

    rows = [
        paired_trial(base_spec, seed=args.seed + k, grid_n=args.grid_n, sg_cfg=sg_cfg)
        for k in range(args.n_seeds)
    ]
    fields = ["seed", "gp_rmse", "sg_rmse", "v_peak_err", "coverage",
              "length_scale", "noise_std"]
    with open(out / "bench.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        for r in rows:
            w.writerow({k: r[k] for k in fields})

    gp_wins = sum(r["gp_rmse"] < r["sg_rmse"] for r in rows)
    summary = {
        "n_seeds": args.n_seeds,
        "gp_rmse_median": float(np.median([r["gp_rmse"] for r in rows])),
        "sg_rmse_median": float(np.median([r["sg_rmse"] for r in rows])),
        "gp_win_fraction": gp_wins / args.n_seeds,
        "coverage_mean": float(np.mean([r["coverage"] for r in rows])),
    }
    _write_json(out / "summary.json", {"config": _config_dict(args), "summary": summary})
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"analyze": cmd_analyze, "synth": cmd_synth, "bench": cmd_bench}[args.command]
    try:
        return handler(args)
    except DqdvGpError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
