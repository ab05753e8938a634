"""Command-line interface.

One executable with subcommands covering the pipeline:

    jndfilter filter   --input in.pgm --output out.pgm [--config cfg.toml]
    jndfilter jnd-map  --input in.pgm --output map.csv
    jndfilter loss     --filtered f.pgm --gt g.pgm --orig o.pgm [--k 10] ...
    jndfilter metrics  --ref a.pgm --dist b.pgm [--metric all]
    jndfilter bdrate   --anchor a.csv --test t.csv [--metric psnr]
    jndfilter bench    --config bench.toml --out results/
    jndfilter selftest [--seed 0]

Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import sys

import numpy as np

from . import bench as benchmod
from . import jnd, losses, metrics
from .bdrate import bd_rate
from .config import load_config
from .image import BLOCK, load_image, save_image
from .injection import apply_prefilter
from .selftest import run_selftest


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; this tool reserves 2 for runtime
    # failures and reports usage problems as 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_common(parser):
    parser.add_argument("--config", default=None, metavar="PATH",
                        help="TOML config file, or 'default' for package defaults")
    parser.add_argument("--verbose", action="store_true", help="enable debug logging")
    parser.add_argument("--seed", type=int, default=0,
                        help="seed for randomized checks (selftest)")
    parser.add_argument("--json", action="store_true", help="machine-readable output")


def _add_raw_dims(parser):
    parser.add_argument("--width", type=int, default=None,
                        help="frame width for raw .yuv inputs")
    parser.add_argument("--height", type=int, default=None,
                        help="frame height for raw .yuv inputs")


def _load_input(path, args):
    return load_image(path, width=args.width, height=args.height)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="jndfilter", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND",
                                parser_class=_Parser)

    p = sub.add_parser("filter",
                       help="apply the JND-guided pre-filter to an image")
    p.add_argument("--input", required=True, help="input image (pgm/png/y4m)")
    p.add_argument("--output", required=True, help="filtered output image")
    p.add_argument("--saliency-map", default=None, metavar="PATH",
                   help="PGM saliency map (enables the saliency factor)")
    _add_raw_dims(p)
    _add_common(p)

    p = sub.add_parser("jnd-map",
                       help="dump per-block JND thresholds as CSV")
    p.add_argument("--input", required=True, help="input image (pgm/png/y4m)")
    p.add_argument("--output", required=True, help="output CSV path")
    p.add_argument("--saliency-map", default=None, metavar="PATH",
                   help="PGM saliency map (enables the saliency factor)")
    _add_raw_dims(p)
    _add_common(p)

    p = sub.add_parser("loss",
                       help="hybrid loss report between filtered/reference/original")
    p.add_argument("--filtered", required=True, help="filtered image")
    p.add_argument("--gt", required=True, help="reference (ground-truth) image")
    p.add_argument("--orig", required=True, help="original input image")
    p.add_argument("--k", type=int, default=10, help="zigzag cutoff for the conservation term")
    p.add_argument("--lambda1", type=float, default=1.0, help="pixel-fidelity weight")
    p.add_argument("--lambda2", type=float, default=0.16, help="structural-similarity weight")
    p.add_argument("--lambda3", type=float, default=0.02, help="frequency-loss weight")
    p.add_argument("--emit-grad", default=None, metavar="PATH",
                   help="write the total-loss gradient plane as .npy")
    _add_raw_dims(p)
    _add_common(p)

    p = sub.add_parser("metrics", help="full-reference quality metrics")
    p.add_argument("--ref", required=True, help="reference image")
    p.add_argument("--dist", required=True, help="distorted image")
    p.add_argument("--metric", default="all", choices=metrics.METRIC_NAMES + ("all",),
                   help="metric to compute")
    _add_raw_dims(p)
    _add_common(p)

    p = sub.add_parser("bdrate",
                       help="BD-rate between two RD-curve CSV files")
    p.add_argument("--anchor", required=True, help="anchor curve CSV")
    p.add_argument("--test", required=True, help="test curve CSV")
    p.add_argument("--metric", default="psnr", help="quality column to use")
    _add_common(p)

    p = sub.add_parser("bench", help="run the benchmark grid")
    p.add_argument("--out", required=True, help="output directory for results")
    _add_common(p)

    p = sub.add_parser("selftest",
                       help="run the built-in numerical verification suite")
    _add_common(p)

    return parser


# ---------------------------------------------------------------------------
# Subcommands

def _load_saliency(args, cfg, plane):
    if args.saliency_map is None:
        return cfg.jnd, None
    saliency_plane = load_image(args.saliency_map)
    if (saliency_plane.width, saliency_plane.height) != (plane.width, plane.height):
        raise ValueError("saliency map dimensions must match the input image")
    params = dataclasses.replace(cfg.jnd, enable_sa=True)
    return params, jnd.saliency_factors(saliency_plane, params)


def _cmd_filter(args) -> int:
    cfg = load_config(args.config)
    plane = _load_input(args.input, args)
    params, saliency = _load_saliency(args, cfg, plane)
    filtered = apply_prefilter(plane, params, cfg.injection, saliency=saliency)
    save_image(filtered, args.output)
    return 0


def _cmd_jnd_map(args) -> int:
    cfg = load_config(args.config)
    plane = _load_input(args.input, args)
    params, saliency = _load_saliency(args, cfg, plane)
    jnd_map = jnd.compute_jnd_map(plane, params, saliency=saliency)
    with open(args.output, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["block_row", "block_col"]
            + [f"j_{u}_{v}" for u in range(BLOCK) for v in range(BLOCK)]
        )
        for by in range(jnd_map.block_rows):
            for bx in range(jnd_map.block_cols):
                writer.writerow(
                    [by, bx] + [repr(float(t)) for t in jnd_map.thresholds[by, bx].ravel()]
                )
    return 0


def _cmd_loss(args) -> int:
    weights = losses.LossWeights(
        lambda1=args.lambda1, lambda2=args.lambda2, lambda3=args.lambda3, k=args.k
    )
    filtered = _load_input(args.filtered, args)
    gt = _load_input(args.gt, args)
    orig = _load_input(args.orig, args)
    report = losses.total_loss(filtered, gt, orig, weights, with_grad=args.emit_grad is not None)
    if args.emit_grad:
        np.save(args.emit_grad, report.grad)
    if args.json:
        print(json.dumps(report.as_dict(), indent=2, sort_keys=True))
    else:
        for key, value in report.as_dict().items():
            print(f"{key}={value:.10g}")
    return 0


def _cmd_metrics(args) -> int:
    ref = _load_input(args.ref, args)
    dist = _load_input(args.dist, args)
    if args.metric == "all":
        values = metrics.compute_all(ref, dist)
    else:
        values = {args.metric: metrics.compute(args.metric, ref, dist)}
    if args.json:
        print(json.dumps({k: v.value for k, v in values.items()}, indent=2, sort_keys=True))
    else:
        for name in metrics.METRIC_NAMES:
            if name in values:
                print(f"{name}={values[name].value:.6f}")
    return 0


def _read_curve(path, metric):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValueError(f"{path}: empty CSV")
        rate_col = next((c for c in ("bits", "bitrate", "rate") if c in reader.fieldnames), None)
        if rate_col is None:
            raise ValueError(f"{path}: no bits/bitrate/rate column")
        if metric not in reader.fieldnames:
            raise ValueError(f"{path}: no {metric!r} column")
        rates, quals = [], []
        for rec in reader:
            rates.append(float(rec[rate_col]))
            quals.append(float(rec[metric]))
    return rates, quals


def _cmd_bdrate(args) -> int:
    anchor = _read_curve(args.anchor, args.metric)
    test = _read_curve(args.test, args.metric)
    value = bd_rate(anchor[0], anchor[1], test[0], test[1])
    if args.json:
        print(json.dumps({"metric": args.metric, "bdbr_percent": value}))
    else:
        print(f"{value:.2f}")
    return 0


def _cmd_bench(args) -> int:
    cfg = load_config(args.config)
    if cfg.bench is None:
        raise ValueError("config has no [bench] section")
    result = benchmod.run_benchmark(cfg.bench, args.out)
    print(f"wrote {len(result.rows)} RD points to {result.csv_path}")
    if result.errors:
        print(f"{len(result.errors)} cells failed; see errors.json", file=sys.stderr)
    if args.json:
        print(json.dumps(result.summary, indent=2, sort_keys=True))
    return 0


def _cmd_selftest(args) -> int:
    return 0 if run_selftest(seed=args.seed) else 2


_COMMANDS = {
    "filter": _cmd_filter,
    "jnd-map": _cmd_jnd_map,
    "loss": _cmd_loss,
    "metrics": _cmd_metrics,
    "bdrate": _cmd_bdrate,
    "bench": _cmd_bench,
    "selftest": _cmd_selftest,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return _COMMANDS[args.command](args)
    except BrokenPipeError:
        raise
    except Exception as exc:
        print(f"jndfilter {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
