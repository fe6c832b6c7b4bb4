import dataclasses
import math

import pytest

from rioulab.errors import BetaOutOfDomain, SolverError
from rioulab.riou_params import RESIDUAL_TOL, RiouParams, residuals, solve_params

from oracles import solve_riou_numeric

BETA_GRID = (0.55, 0.65, 0.75, 0.85, 0.90, 0.95, 0.99)

# frozen from the independent root-finder oracle (solve_riou_numeric)
ORACLE_095 = {
    "a": 2.0560294989898775,
    "b": 0.005711193052749668,
    "c": 1.0027777777777778,
    "k": 0.005727057477896195,
    "t": -1.5886438696848776e-05,
}


class TestSolve:
    def test_operating_point_matches_frozen_oracle(self):
        p = solve_params(0.95)
        for name, expect in ORACLE_095.items():
            assert getattr(p, name) == pytest.approx(expect, rel=1e-8)

    def test_operating_point_matches_live_oracle(self):
        a, b, c, k, t = solve_riou_numeric(0.95)
        p = solve_params(0.95)
        assert p.a == pytest.approx(a, rel=1e-8)
        assert p.b == pytest.approx(b, rel=1e-8)
        assert p.c == pytest.approx(c, rel=1e-8)
        assert p.k == pytest.approx(k, rel=1e-8)
        assert p.t == pytest.approx(t, rel=1e-8)

    def test_quarter_point_closed_form_pole(self):
        p = solve_params(0.75)
        assert p.c == 0.75 ** 2 / (2 * 0.75 - 1)  # exactly 1.125
        assert p.a == pytest.approx(3.164403810768127, rel=1e-10)
        assert p.k == pytest.approx(0.44499428588926787, rel=1e-10)
        assert p.b == pytest.approx(0.39555047634601587, rel=1e-10)
        assert p.t == pytest.approx(-0.05241277784178253, rel=1e-10)

    @pytest.mark.parametrize("beta", BETA_GRID)
    def test_grid_residuals_and_pole(self, beta):
        p = solve_params(beta)
        assert max(abs(r) for r in residuals(p)) < RESIDUAL_TOL
        assert p.c > 1.0
        assert p.a > 0 and p.b > 0 and p.k > 0

    @pytest.mark.parametrize("beta", BETA_GRID)
    def test_grid_against_numeric_oracle(self, beta):
        a, b, c, k, t = solve_riou_numeric(beta)
        p = solve_params(beta)
        assert p.c == pytest.approx(c, rel=1e-8)
        assert p.a == pytest.approx(a, rel=1e-8)

    @pytest.mark.parametrize("beta", BETA_GRID)
    def test_closed_form_consistency(self, beta):
        # algebraic consequence of constraints (i)-(iii)
        p = solve_params(beta)
        assert (p.c - beta) ** 2 == pytest.approx(p.c * (p.c - 1.0), abs=1e-10)

    def test_pole_decreases_toward_one(self):
        cs = [solve_params(b).c for b in [0.51 + 0.01 * i for i in range(49)]]
        assert all(c2 < c1 for c1, c2 in zip(cs, cs[1:]))
        assert cs[-1] > 1.0
        assert solve_params(0.999).c == pytest.approx(1.0, abs=1e-3)


class TestDomain:
    @pytest.mark.parametrize("beta", (0.5, 1.0, 0.3, 1.5, 0.0, -1.0))
    def test_rejected(self, beta):
        with pytest.raises(BetaOutOfDomain):
            solve_params(beta)

    def test_nan_rejected(self):
        with pytest.raises(BetaOutOfDomain):
            solve_params(math.nan)


class TestResiduals:
    def test_perturbation_sensitivity(self):
        p = solve_params(0.95)
        bumped = dataclasses.replace(p, a=p.a + 0.1)
        r = residuals(bumped)
        # constraints (ii), (iii), (v) depend on a; (i) and (iv) do not
        assert abs(r[0]) < 1e-12
        assert abs(r[1]) > 1e-3
        assert abs(r[2]) > 1e-4
        assert abs(r[3]) < 1e-12
        assert abs(r[4]) > 1e-3

    def test_solved_instances_near_zero(self):
        for beta in (0.85, 0.95):
            assert max(abs(r) for r in residuals(solve_params(beta))) < 1e-10


class TestValidation:
    def test_bad_coefficients_rejected(self):
        with pytest.raises(SolverError):
            RiouParams(beta=0.95, a=-1.0, b=0.1, c=1.1, k=0.1, t=0.0)
        with pytest.raises(SolverError):
            RiouParams(beta=0.95, a=1.0, b=0.1, c=0.9, k=0.1, t=0.0)
        with pytest.raises(SolverError):
            RiouParams(beta=0.95, a=1.0, b=0.1, c=1.1, k=math.inf, t=0.0)
