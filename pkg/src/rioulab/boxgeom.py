"""Axis-aligned box geometry: areas, overlaps, IoU and its generalized variants.

All boxes are in corner form (x_min, y_min, x_max, y_max) on a shared,
unit-free plane.  Degenerate boxes (zero width or height) are representable;
operations that would divide by a zero union raise ``UndefinedIoU`` instead
of propagating NaN.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidBox, UndefinedIoU

__all__ = [
    "Box2D",
    "Point2D",
    "area",
    "intersection_area",
    "iou",
    "enclosing_box",
    "center",
    "giou_value",
    "diou_value",
]


@dataclass(frozen=True)
class Point2D:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise InvalidBox(f"non-finite point ({self.x}, {self.y})")


@dataclass(frozen=True)
class Box2D:
    """Axis-aligned rectangle; zero-area boxes with equal edges are allowed."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        coords = (self.x_min, self.y_min, self.x_max, self.y_max)
        if not all(math.isfinite(v) for v in coords):
            raise InvalidBox(f"non-finite coordinates {coords}")
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise InvalidBox(f"min corner exceeds max corner: {coords}")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min


def area(b: Box2D) -> float:
    """Rectangle area; zero for degenerate boxes."""
    return b.width * b.height


def intersection_area(a: Box2D, b: Box2D) -> float:
    """Area of the overlap rectangle; 0 when disjoint or merely touching."""
    iw = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    ih = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    return iw * ih


def _union_area(a: Box2D, b: Box2D, inter: float) -> float:
    return area(a) + area(b) - inter


def iou(a: Box2D, b: Box2D) -> float:
    """Intersection over union, in [0, 1].

    Raises ``UndefinedIoU`` when both boxes are degenerate (union area 0);
    surfacing the undefined case beats silently propagating 0/0 = NaN.
    """
    inter = intersection_area(a, b)
    union = _union_area(a, b, inter)
    if union <= 0.0:
        raise UndefinedIoU("both boxes degenerate; IoU is 0/0")
    return inter / union


def enclosing_box(a: Box2D, b: Box2D) -> Box2D:
    """Smallest axis-aligned box containing both inputs."""
    return Box2D(
        min(a.x_min, b.x_min),
        min(a.y_min, b.y_min),
        max(a.x_max, b.x_max),
        max(a.y_max, b.y_max),
    )


def center(b: Box2D) -> Point2D:
    """Midpoint of the box corners."""
    return Point2D(0.5 * (b.x_min + b.x_max), 0.5 * (b.y_min + b.y_max))


def giou_value(a: Box2D, b: Box2D) -> float:
    """Generalized IoU: IoU minus the enclosing-box slack, in (-1, 1]."""
    inter = intersection_area(a, b)
    union = _union_area(a, b, inter)
    if union <= 0.0:
        raise UndefinedIoU("both boxes degenerate; GIoU is undefined")
    enc = area(enclosing_box(a, b))
    return inter / union - (enc - union) / enc


def diou_value(a: Box2D, b: Box2D) -> float:
    """Distance-IoU: IoU minus the squared normalized center distance."""
    inter = intersection_area(a, b)
    union = _union_area(a, b, inter)
    if union <= 0.0:
        raise UndefinedIoU("both boxes degenerate; DIoU is undefined")
    enc = enclosing_box(a, b)
    diag2 = enc.width ** 2 + enc.height ** 2
    ca, cb = center(a), center(b)
    d2 = (ca.x - cb.x) ** 2 + (ca.y - cb.y) ** 2
    return inter / union - d2 / diag2
