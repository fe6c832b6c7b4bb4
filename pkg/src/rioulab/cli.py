"""Command-line front end for the loss laboratory.

Exit codes: 0 ok, 2 input/config error, 3 shape mismatch, 4 I/O failure,
5 numeric-check failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import losses, pyramidcheck, regsim
from .errors import (
    BetaOutOfDomain,
    ConfigError,
    DomainError,
    RiouLabError,
    ShapeMismatch,
)
from .riou_params import residuals, solve_params

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SHAPE = 3
EXIT_IO = 4
EXIT_NUMERIC = 5

GRADCHECK_TOL = 1e-4
GRADCHECK_STEP = 1e-6


def _fmt(x: float) -> str:
    """Shortest round-trip decimal; keeps machine-readable output byte-stable."""
    return repr(float(x))


def _cmd_solve_params(args) -> int:
    try:
        p = solve_params(args.beta)
    except BetaOutOfDomain as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    worst = max(abs(r) for r in residuals(p))
    rows = [("beta", p.beta), ("a", p.a), ("b", p.b), ("c", p.c), ("k", p.k), ("t", p.t)]
    for name, value in rows:
        print(f"{name:<14}{_fmt(value)}")
    print(f"{'max|residual|':<14}{worst:.3e}")
    print("PARAMS " + " ".join(f"{name}={_fmt(value)}" for name, value in rows)
          + f" max_residual={_fmt(worst)}")
    return EXIT_OK


def _curve_rows(beta: float, step: float):
    p = solve_params(beta)
    xs = []
    i = 0
    while True:
        x = i * step
        if x >= 1.0 - 1e-12:
            break
        xs.append(x)
        i += 1
    xs.append(1.0)
    for x in xs:
        yield (x, losses.iou_loss(x), losses.iou_loss_grad_mag(x),
               losses.riou_loss(x, p), losses.riou_grad_mag(x, p))


def _cmd_curves(args) -> int:
    if not 0.0 < args.step <= 0.1:
        print(f"error: step {args.step} outside (0, 0.1]", file=sys.stderr)
        return EXIT_INPUT
    try:
        rows = list(_curve_rows(args.beta, args.step))
    except BetaOutOfDomain as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        with open(args.out, "w", newline="") as fh:
            fh.write("iou,loss_iou,grad_iou,loss_riou,grad_riou\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {len(rows)} rows to {args.out}")
    return EXIT_OK


def gradcheck(trials: int, seed: int, beta: float):
    """Compare analytic and central-difference gradients for every kind.

    Returns {kind name: (max relative error, worst pair)}.  The error is the
    max component difference over the max gradient magnitude of the pair.
    """
    rng = np.random.default_rng(seed)
    pairs = [losses.random_differentiable_pair(rng) for _ in range(trials)]
    kinds = [losses.IOU, losses.GIOU, losses.DIOU,
             losses.rectified(solve_params(beta))]
    results = {}
    for kind in kinds:
        worst = 0.0
        worst_pair = None
        for pred, gt in pairs:
            ana = losses.loss_gradient_boxes(pred, gt, kind).as_tuple()
            num = losses.finite_diff_gradient(pred, gt, kind, GRADCHECK_STEP).as_tuple()
            scale = max(max(abs(v) for v in ana), max(abs(v) for v in num), 1e-9)
            err = max(abs(a - n) for a, n in zip(ana, num)) / scale
            if err > worst:
                worst = err
                worst_pair = (pred, gt)
        results[kind.name] = (worst, worst_pair)
    return results


def _cmd_gradcheck(args) -> int:
    if args.trials < 1:
        print(f"error: trials must be >= 1, got {args.trials}", file=sys.stderr)
        return EXIT_INPUT
    results = gradcheck(args.trials, args.seed, args.beta)
    failed = False
    for name, (err, pair) in results.items():
        print(f"{name:<6} max_rel_err={err:.3e}  (trials={args.trials}, h={GRADCHECK_STEP})")
        if err >= GRADCHECK_TOL:
            failed = True
            pred, gt = pair
            print(f"  FAIL above {GRADCHECK_TOL}; worst pair for reproduction:")
            print(f"  pred={pred!r}")
            print(f"  gt={gt!r}")
    return EXIT_NUMERIC if failed else EXIT_OK


_SIM_REQUIRED = ("sample_count", "iou_distribution", "perturb_mode", "steps",
                 "learning_rate", "loss_kind", "seed")
_SIM_OPTIONAL = ("beta", "budget")


def _load_sim_config(path: str) -> regsim.SimConfig:
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - set(_SIM_REQUIRED) - set(_SIM_OPTIONAL)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    missing = [k for k in _SIM_REQUIRED if k not in raw]
    if missing:
        raise ConfigError(f"missing config keys: {missing}")
    if raw["loss_kind"] == "RIOU" and "beta" not in raw:
        raise ConfigError("loss_kind RIOU requires a beta key")
    try:
        dist = tuple((float(lo), float(w)) for lo, w in raw["iou_distribution"])
        mode = regsim.PerturbMode(raw["perturb_mode"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad config value: {exc}") from None
    kwargs = dict(
        sample_count=int(raw["sample_count"]),
        iou_distribution=dist,
        perturb_mode=mode,
        steps=int(raw["steps"]),
        learning_rate=float(raw["learning_rate"]),
        loss_kind=str(raw["loss_kind"]),
        seed=int(raw["seed"]),
    )
    if "beta" in raw:
        kwargs["beta"] = float(raw["beta"])
    if "budget" in raw:
        kwargs["budget"] = int(raw["budget"])
    return regsim.SimConfig(**kwargs)


def _cmd_simulate(args) -> int:
    try:
        cfg = _load_sim_config(args.config)
        report = regsim.run_descent(cfg)
    except OSError as exc:
        print(f"error: cannot read {args.config}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ConfigError, DomainError, RiouLabError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    hist_path = f"{args.out}_histograms.csv"
    scal_path = f"{args.out}_scalars.csv"
    try:
        with open(hist_path, "w", newline="") as fh:
            fh.write(regsim.report_histograms_csv(report))
        with open(scal_path, "w", newline="") as fh:
            fh.write(regsim.report_scalars_csv(report))
    except OSError as exc:
        print(f"error: cannot write report: {exc}", file=sys.stderr)
        return EXIT_IO
    sys.stdout.write(regsim.summarize(report))
    print(f"wrote {hist_path} and {scal_path}")
    return EXIT_OK


def _load_levels(path: str):
    shapes = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ConfigError(
                    f"{path}:{lineno}: expected 'channels height width'")
            try:
                c, h, w = (int(v) for v in parts)
            except ValueError:
                raise ConfigError(
                    f"{path}:{lineno}: dims must be integers") from None
            shapes.append(pyramidcheck.TensorShape(c, h, w))
    return tuple(shapes)


def _cmd_pyramid(args) -> int:
    try:
        if args.levels:
            levels = _load_levels(args.levels)
        else:
            levels = pyramidcheck.default_levels(args.input_size)
        graph = pyramidcheck.build_tpnet(levels, args.blocks)
    except OSError as exc:
        print(f"error: cannot read {args.levels}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ShapeMismatch as exc:
        print(f"shape mismatch: {exc}", file=sys.stderr)
        return EXIT_SHAPE

    print("levels:")
    for i, nid in enumerate(graph.level_ids):
        print(f"  level{i}: {graph.nodes[nid].shape}")
    print("block outputs:")
    for l, nid in enumerate(graph.block_out_ids):
        print(f"  block{l}: {graph.nodes[nid].shape}")
    print("pyramid:")
    for l, nid in enumerate(graph.pyramid_ids):
        print(f"  P{l}: {graph.nodes[nid].shape}")

    problems = pyramidcheck.validate(graph)
    if problems:
        for p in problems:
            print(f"shape mismatch: {p}", file=sys.stderr)
        return EXIT_SHAPE
    print(f"validation: ok ({len(graph.nodes)} nodes)")

    if args.smoke:
        small_levels, small_blocks = pyramidcheck.downscale_for_smoke(levels, args.blocks)
        small = pyramidcheck.build_tpnet(small_levels, small_blocks)
        result = pyramidcheck.forward_smoke(small, args.seed)
        for nid in sorted(result.digests):
            print(f"SMOKE {nid},{result.digests[nid]}")
        print(f"SMOKE_TOTAL {result.digest}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rioulab",
        description="Bounding-box regression loss laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve-params",
                       help="solve the five loss-shape constraints for a given beta")
    p.add_argument("--beta", type=float, required=True,
                   help="gradient-peak IoU position, in (0.5, 1) exclusive")
    p.set_defaults(func=_cmd_solve_params)

    p = sub.add_parser("curves", help="emit loss/gradient curves as CSV")
    p.add_argument("--beta", type=float, default=0.95,
                   help="gradient-peak position (default 0.95)")
    p.add_argument("--step", type=float, default=0.001,
                   help="grid step in (0, 0.1] (default 0.001)")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=_cmd_curves)

    p = sub.add_parser("gradcheck",
                       help="compare analytic box gradients against central differences")
    p.add_argument("--trials", type=int, default=1000,
                   help="random configurations per loss kind (default 1000)")
    p.add_argument("--seed", type=int, default=20240811, help="rng seed")
    p.add_argument("--beta", type=float, default=0.95,
                   help="beta for the rectified kind (default 0.95)")
    p.set_defaults(func=_cmd_gradcheck)

    p = sub.add_parser("simulate", help="run the box-regression simulator")
    p.add_argument("--config", required=True,
                   help="JSON config with the simulation keys")
    p.add_argument("--out", default="simreport",
                   help="output prefix for the two report CSVs")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("pyramid",
                       help="build and validate the pyramid wiring graph")
    p.add_argument("--input-size", type=int, choices=(320, 512), default=320,
                   help="square input size for the default level table")
    p.add_argument("--levels", help="level table file: 'channels height width' per line")
    p.add_argument("--blocks", type=int, default=pyramidcheck.DEFAULT_T_BLOCKS,
                   help="number of transductive blocks (default 5)")
    p.add_argument("--smoke", action="store_true",
                   help="also run the numeric smoke-forward on a down-scaled graph")
    p.add_argument("--seed", type=int, default=0, help="seed for the smoke-forward")
    p.set_defaults(func=_cmd_pyramid)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


def entry():
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
