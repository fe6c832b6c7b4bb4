#!/usr/bin/env python3
"""Time the compiled descent kernel against the pure-Python fallback.

Runs the same population through both backends for each loss kind, checks
that the trajectories agree bit for bit, and prints the speedup.

Usage: python benchmarks/bench_backends.py [--samples N] [--steps N]
"""

import argparse
import math
import time

import numpy as np

from rioulab import _kernels_py
from rioulab.regsim import DEFAULT_IOU_DISTRIBUTION, PerturbMode, SimConfig, sample_population
from rioulab.riou_params import solve_params

try:
    from rioulab import _kernels
except ImportError:
    _kernels = None

KINDS = (("IOU", 0), ("GIOU", 1), ("DIOU", 2), ("RIOU", 3))


def build_arrays(samples, seed=7):
    cfg = SimConfig(
        sample_count=samples,
        iou_distribution=DEFAULT_IOU_DISTRIBUTION,
        perturb_mode=PerturbMode.SHIFT,
        steps=1,
        learning_rate=0.05,
        loss_kind="IOU",
        seed=seed,
    )
    pop = sample_population(cfg)
    params = np.empty((samples, 4))
    gts = np.empty((samples, 4))
    for i, pair in enumerate(pop):
        a = pair.anchor
        params[i] = (0.5 * (a.x_min + a.x_max), 0.5 * (a.y_min + a.y_max),
                     math.log(a.width), math.log(a.height))
        gts[i] = (pair.gt.x_min, pair.gt.y_min, pair.gt.x_max, pair.gt.y_max)
    return params, gts


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--samples", type=int, default=2000)
    parser.add_argument("--steps", type=int, default=100)
    args = parser.parse_args()

    params, gts = build_arrays(args.samples)
    p = solve_params(0.95)
    coeffs = (p.a, p.b, p.k, p.c)
    total = args.samples * args.steps

    print(f"{args.samples} samples x {args.steps} steps "
          f"({total} descent iterations per run)\n")
    print(f"{'kind':<6} {'python':>10} {'compiled':>10} {'speedup':>9}  bitwise")
    for name, code in KINDS:
        py_params = params.copy()
        t0 = time.perf_counter()
        _kernels_py.descend_population(py_params, gts, code, *coeffs, 0.05, args.steps)
        py_time = time.perf_counter() - t0

        if _kernels is None:
            print(f"{name:<6} {py_time:>9.3f}s {'n/a':>10} {'n/a':>9}  extension not built")
            continue

        c_params = params.copy()
        t0 = time.perf_counter()
        _kernels.descend_population(c_params, gts, code, *coeffs, 0.05, args.steps)
        c_time = time.perf_counter() - t0
        same = py_params.tobytes() == c_params.tobytes()
        print(f"{name:<6} {py_time:>9.3f}s {c_time:>9.3f}s {py_time / c_time:>8.1f}x"
              f"  {'identical' if same else 'MISMATCH'}")


if __name__ == "__main__":
    main()
