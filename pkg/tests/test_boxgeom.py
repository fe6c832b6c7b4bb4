import math

import numpy as np
import pytest

from rioulab.boxgeom import (
    Box2D,
    area,
    center,
    diou_value,
    enclosing_box,
    giou_value,
    intersection_area,
    iou,
)
from rioulab.errors import InvalidBox, UndefinedIoU

from oracles import mc_intersection_area, pixel_intersection_area


def box(*coords):
    return Box2D(*coords)


def random_box(rng, lo=-20.0, hi=20.0, max_side=15.0):
    x = rng.uniform(lo, hi)
    y = rng.uniform(lo, hi)
    w = rng.uniform(0.01, max_side)
    h = rng.uniform(0.01, max_side)
    return Box2D(x, y, x + w, y + h)


class TestConstruction:
    def test_valid(self):
        b = box(0, 0, 2, 2)
        assert (b.width, b.height) == (2, 2)

    def test_degenerate_allowed(self):
        assert area(box(1, 1, 1, 5)) == 0.0

    def test_inverted_rejected(self):
        with pytest.raises(InvalidBox):
            box(2, 0, 0, 2)

    def test_non_finite_rejected(self):
        with pytest.raises(InvalidBox):
            box(0, 0, math.inf, 1)
        with pytest.raises(InvalidBox):
            box(0, math.nan, 1, 1)


class TestArea:
    def test_unit_arithmetic(self):
        assert area(box(0, 0, 2, 2)) == 4.0
        assert area(box(0, 0, 3, 1)) == 3.0

    def test_degenerate(self):
        assert area(box(1, 1, 1, 5)) == 0.0


class TestIntersection:
    def test_overlap_vs_monte_carlo(self):
        a, b = box(0, 0, 2, 2), box(1, 1, 3, 3)
        assert intersection_area(a, b) == 1.0
        mc = mc_intersection_area(a, b, samples=10 ** 6, seed=42)
        assert abs(mc - 1.0) < 1e-2

    def test_self(self):
        a = box(-1, 2, 4, 7)
        assert intersection_area(a, a) == area(a)

    def test_disjoint(self):
        assert intersection_area(box(0, 0, 1, 1), box(2, 2, 3, 3)) == 0.0

    def test_touching_edge_is_zero(self):
        assert intersection_area(box(0, 0, 1, 1), box(1, 0, 2, 1)) == 0.0


class TestIoU:
    def test_exact_fraction(self):
        assert iou(box(0, 0, 2, 2), box(1, 1, 3, 3)) == pytest.approx(1.0 / 7.0, abs=1e-15)

    def test_identity(self):
        a = box(0, 0, 5, 3)
        assert iou(a, a) == 1.0

    def test_disjoint(self):
        assert iou(box(0, 0, 1, 1), box(2, 2, 3, 3)) == 0.0

    def test_both_degenerate_is_error(self):
        with pytest.raises(UndefinedIoU):
            iou(box(0, 0, 0, 1), box(2, 2, 2, 3))

    def test_one_degenerate_ok(self):
        assert iou(box(0, 0, 0, 1), box(2, 2, 3, 3)) == 0.0


class TestEnclosingAndCenter:
    def test_corner_union(self):
        assert enclosing_box(box(0, 0, 1, 1), box(2, 2, 3, 3)) == box(0, 0, 3, 3)

    def test_identity(self):
        a = box(-2, 1, 4, 5)
        assert enclosing_box(a, a) == a

    def test_min_max(self):
        assert enclosing_box(box(0, 0, 2, 2), box(1, 1, 3, 3)) == box(0, 0, 3, 3)

    def test_center(self):
        c = center(box(0, 0, 2, 2))
        assert (c.x, c.y) == (1.0, 1.0)
        c = center(box(-1, -1, 1, 1))
        assert (c.x, c.y) == (0.0, 0.0)
        c = center(box(0, 0, 3, 1))
        assert (c.x, c.y) == (1.5, 0.5)


class TestGiou:
    def test_identity(self):
        a = box(0, 0, 4, 4)
        assert giou_value(a, a) == 1.0

    def test_disjoint_hand_arithmetic(self):
        # IoU 0, enclosure 3, union 2
        assert giou_value(box(0, 0, 1, 1), box(2, 0, 3, 1)) == pytest.approx(-1.0 / 3.0, abs=1e-15)

    def test_exact_overlap_case(self):
        expected = 1.0 / 7.0 - 2.0 / 9.0
        assert giou_value(box(0, 0, 2, 2), box(1, 1, 3, 3)) == pytest.approx(expected, abs=1e-15)


class TestDiou:
    def test_identity(self):
        a = box(0, 0, 4, 4)
        assert diou_value(a, a) == 1.0

    def test_disjoint(self):
        # d^2 = 4, enclosure diag^2 = 10
        assert diou_value(box(0, 0, 1, 1), box(2, 0, 3, 1)) == pytest.approx(-0.4, abs=1e-15)

    def test_concentric(self):
        assert diou_value(box(0, 0, 4, 4), box(1, 1, 3, 3)) == pytest.approx(0.25, abs=1e-15)


class TestPixelOracle:
    def test_integer_grid_exact(self):
        rng = np.random.default_rng(123)
        for _ in range(1000):
            coords = rng.integers(0, 33, size=8)
            a = Box2D(min(coords[0], coords[1]), min(coords[2], coords[3]),
                      max(coords[0], coords[1]), max(coords[2], coords[3]))
            b = Box2D(min(coords[4], coords[5]), min(coords[6], coords[7]),
                      max(coords[4], coords[5]), max(coords[6], coords[7]))
            assert intersection_area(a, b) == pixel_intersection_area(a, b)


class TestInvariants:
    def test_symmetry_and_bounds(self):
        rng = np.random.default_rng(7)
        for _ in range(10_000):
            a = random_box(rng)
            b = random_box(rng)
            v_iou = iou(a, b)
            v_giou = giou_value(a, b)
            v_diou = diou_value(a, b)
            assert iou(b, a) == v_iou
            assert giou_value(b, a) == v_giou
            assert diou_value(b, a) == pytest.approx(v_diou, abs=1e-12)
            assert 0.0 <= v_iou <= 1.0
            assert -1.0 < v_giou <= 1.0
            assert v_giou <= v_iou + 1e-15
            assert v_diou <= v_iou + 1e-15
            if a != b:
                assert v_iou < 1.0

    def test_unity_iff_equal(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            a = random_box(rng)
            assert iou(a, a) == giou_value(a, a) == diou_value(a, a) == 1.0

    def test_translation_invariance(self):
        rng = np.random.default_rng(13)
        for _ in range(500):
            a = random_box(rng)
            b = random_box(rng)
            dx, dy = rng.uniform(-50, 50, 2)
            a2 = Box2D(a.x_min + dx, a.y_min + dy, a.x_max + dx, a.y_max + dy)
            b2 = Box2D(b.x_min + dx, b.y_min + dy, b.x_max + dx, b.y_max + dy)
            assert iou(a2, b2) == pytest.approx(iou(a, b), abs=1e-9)
            assert giou_value(a2, b2) == pytest.approx(giou_value(a, b), abs=1e-9)
            assert diou_value(a2, b2) == pytest.approx(diou_value(a, b), abs=1e-9)

    def test_scale_invariance(self):
        rng = np.random.default_rng(17)
        for _ in range(500):
            a = random_box(rng)
            b = random_box(rng)
            s = rng.uniform(0.1, 10.0)
            ox, oy = rng.uniform(-5, 5, 2)

            def scaled(v, o):
                return o + s * (v - o)

            a2 = Box2D(scaled(a.x_min, ox), scaled(a.y_min, oy),
                       scaled(a.x_max, ox), scaled(a.y_max, oy))
            b2 = Box2D(scaled(b.x_min, ox), scaled(b.y_min, oy),
                       scaled(b.x_max, ox), scaled(b.y_max, oy))
            assert iou(a2, b2) == pytest.approx(iou(a, b), abs=1e-9)
            assert giou_value(a2, b2) == pytest.approx(giou_value(a, b), abs=1e-9)
            assert diou_value(a2, b2) == pytest.approx(diou_value(a, b), abs=1e-9)
