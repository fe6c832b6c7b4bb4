"""Independent oracles used by the tests.

Everything here recomputes expected values from first principles through a
different route than the library code: Monte-Carlo and pixel-count area
estimates, and a general-purpose root-finder for the loss-shape constraint
system.  None of it imports the solver or gradient implementations it checks.
"""

import math

import numpy as np
from scipy.optimize import root

from rioulab.boxgeom import Box2D


def mc_intersection_area(a: Box2D, b: Box2D, samples: int, seed: int) -> float:
    """Monte-Carlo rasterization estimate of the overlap area."""
    x_lo = min(a.x_min, b.x_min)
    x_hi = max(a.x_max, b.x_max)
    y_lo = min(a.y_min, b.y_min)
    y_hi = max(a.y_max, b.y_max)
    field = (x_hi - x_lo) * (y_hi - y_lo)
    rng = np.random.default_rng(seed)
    xs = rng.uniform(x_lo, x_hi, samples)
    ys = rng.uniform(y_lo, y_hi, samples)
    inside = (
        (xs >= a.x_min) & (xs <= a.x_max) & (ys >= a.y_min) & (ys <= a.y_max)
        & (xs >= b.x_min) & (xs <= b.x_max) & (ys >= b.y_min) & (ys <= b.y_max)
    )
    return field * inside.mean()


def pixel_intersection_area(a: Box2D, b: Box2D) -> int:
    """Exact overlap of integer-coordinate boxes by counting unit cells."""
    count = 0
    x_lo = int(min(a.x_min, b.x_min))
    x_hi = int(max(a.x_max, b.x_max))
    y_lo = int(min(a.y_min, b.y_min))
    y_hi = int(max(a.y_max, b.y_max))
    for x in range(x_lo, x_hi):
        for y in range(y_lo, y_hi):
            in_a = a.x_min <= x and x + 1 <= a.x_max and a.y_min <= y and y + 1 <= a.y_max
            in_b = b.x_min <= x and x + 1 <= b.x_max and b.y_min <= y and y + 1 <= b.y_max
            if in_a and in_b:
                count += 1
    return count


def solve_riou_numeric(beta: float) -> tuple[float, float, float, float, float]:
    """Solve the full five-equation system with a guarded root-finder.

    Returns (a, b, c, k, t).  Tries a ladder of initial pole positions and
    accepts the first solution with residuals below 1e-10 and the pole right
    of the unit interval.
    """

    def equations(v):
        a, b, c, k, t = v
        return [
            b - k / c,
            a + b + k / (1.0 - c),
            c - math.sqrt(abs(k / a)) - beta,
            k * math.log(abs(c)) + t,
            a / 2.0 + b + k * math.log(abs(1.0 - c)) + t - 1.0,
        ]

    for c0 in (1.001, 1.01, 1.05, 1.2, 1.5, 2.0, 3.0, 5.0, 10.0):
        a0 = 2.0
        k0 = a0 * (c0 - beta) ** 2
        b0 = k0 / c0
        t0 = -k0 * math.log(c0)
        sol = root(equations, [a0, b0, c0, k0, t0], method="hybr", tol=1e-14)
        if not sol.success:
            continue
        a, b, c, k, t = sol.x
        if c > 1.0 and max(abs(r) for r in equations(sol.x)) < 1e-10:
            return a, b, c, k, t
    raise AssertionError(f"numeric oracle failed to converge for beta={beta}")
