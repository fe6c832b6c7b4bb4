"""Solve the five-constraint system for the rectified-IoU loss coefficients.

The loss gradient magnitude is the hyperbola g(x) = (a*x + b) + k/(x - c) on
x = IoU in [0, 1].  Five constraints pin the coefficients given the desired
gradient-peak position beta:

    (i)    g(0) = 0                 ->  b - k/c = 0
    (ii)   g(1) = 0                 ->  a + b + k/(1 - c) = 0
    (iii)  g'(beta) = 0, peak at x=beta  ->  c - sqrt(k/a) = beta
    (iv)   loss(0) = 1              ->  k*ln|c| + t = 0
    (v)    loss(1) = 0              ->  a/2 + b + k*ln|1 - c| + t = 1

Eliminating a, b, k from (i)-(iii) gives the closed form c = beta^2/(2*beta - 1),
then k = a*(c - beta)^2, b = k/c, a from (v), t from (iv).  The closed form is
exact and fast; the residuals of every solve are verified regardless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import BetaOutOfDomain, SolverError

__all__ = ["RiouParams", "solve_params", "residuals", "RESIDUAL_TOL"]

RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class RiouParams:
    """Solved coefficients of one rectified-IoU loss instance.

    ``beta`` is the IoU at which the gradient curve peaks, in (0.5, 1).
    ``c`` > 1 keeps the hyperbola's pole outside [0, 1].
    """

    beta: float
    a: float
    b: float
    c: float
    k: float
    t: float

    def __post_init__(self):
        for name in ("beta", "a", "b", "c", "k", "t"):
            if not math.isfinite(getattr(self, name)):
                raise SolverError(f"non-finite coefficient {name}")
        if self.a <= 0.0 or self.k <= 0.0 or self.b <= 0.0 or self.c <= 1.0:
            raise SolverError(
                "coefficients must satisfy a>0, b>0, k>0, c>1 for a "
                "rise-then-fall gradient on [0, 1]"
            )


def solve_params(beta: float) -> RiouParams:
    """Solve the five-constraint system for a given gradient-peak position.

    Raises ``BetaOutOfDomain`` for beta outside the open interval (0.5, 1):
    the closed-form reduction has a pole at beta = 0.5, and beta = 1 puts the
    gradient pole at IoU = 1 where the system is singular.
    """
    if not math.isfinite(beta) or not 0.5 < beta < 1.0:
        raise BetaOutOfDomain(
            f"beta={beta!r} outside the valid open domain (0.5, 1); at "
            "beta <= 0.5 the reduction c = beta^2/(2*beta - 1) has no "
            "solution with c > 1, and at beta = 1 the gradient pole lands "
            "on IoU = 1 making the constraint system singular"
        )
    c = beta * beta / (2.0 * beta - 1.0)
    s = c - beta
    s2 = s * s
    denom = 0.5 + s2 / c + s2 * math.log((c - 1.0) / c)
    a = 1.0 / denom
    k = a * s2
    b = k / c
    t = -k * math.log(c)
    params = RiouParams(beta, a, b, c, k, t)
    worst = max(abs(r) for r in residuals(params))
    if worst >= RESIDUAL_TOL:
        # Only reachable in double precision for beta pathologically close
        # to the domain endpoints.
        raise SolverError(
            f"residual verification failed for beta={beta}: max |r| = {worst:.3e}"
        )
    return params


def residuals(p: RiouParams) -> tuple[float, float, float, float, float]:
    """Left minus right of each constraint, in the order (i)..(v) above."""
    return (
        p.b - p.k / p.c,
        p.a + p.b + p.k / (1.0 - p.c),
        p.c - math.sqrt(p.k / p.a) - p.beta,
        p.k * math.log(abs(p.c)) + p.t,
        p.a / 2.0 + p.b + p.k * math.log(abs(1.0 - p.c)) + p.t - 1.0,
    )
