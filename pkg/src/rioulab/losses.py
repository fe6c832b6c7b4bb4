"""Loss values and gradients for the IoU / GIoU / DIoU / RIoU family.

Scalar losses are pure functions over box geometry.  Box-coordinate gradients
are analytic (chain rule through the piecewise intersection/enclosure
geometry) and are checked against a central-difference oracle; the oracle
differentiates the scalar path only and never shares code with the analytic
path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import _backend, boxgeom
from .boxgeom import Box2D
from .errors import DegenerateEnclosure, DomainError, UndefinedIoU
from .riou_params import RiouParams

__all__ = [
    "LossKind",
    "IOU",
    "GIOU",
    "DIOU",
    "rectified",
    "BoxGradient",
    "iou_loss",
    "iou_loss_grad_mag",
    "riou_grad_mag",
    "riou_loss",
    "giou_loss",
    "diou_loss",
    "center_penalty",
    "localization_loss",
    "loss_gradient_boxes",
    "finite_diff_gradient",
    "random_differentiable_pair",
]

_KIND_CODES = {
    "IOU": _backend.KIND_IOU,
    "GIOU": _backend.KIND_GIOU,
    "DIOU": _backend.KIND_DIOU,
    "RIOU": _backend.KIND_RIOU,
}


@dataclass(frozen=True)
class LossKind:
    """Tag selecting one localization loss; RIOU carries its solved params."""

    name: str
    riou: RiouParams | None = None

    def __post_init__(self):
        if self.name not in _KIND_CODES:
            raise DomainError(f"unknown loss kind {self.name!r}")
        if self.name == "RIOU" and self.riou is None:
            raise DomainError("RIOU requires solved RiouParams")
        if self.name != "RIOU" and self.riou is not None:
            raise DomainError(f"{self.name} does not take RiouParams")

    @property
    def code(self) -> int:
        return _KIND_CODES[self.name]


IOU = LossKind("IOU")
GIOU = LossKind("GIOU")
DIOU = LossKind("DIOU")


def rectified(params: RiouParams) -> LossKind:
    """Rectified-IoU loss kind with the given solved coefficients."""
    return LossKind("RIOU", params)


@dataclass(frozen=True)
class BoxGradient:
    """Partial derivatives of a scalar loss w.r.t. the predicted corners."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x_min, self.y_min, self.x_max, self.y_max)


def _check_unit(iou: float) -> None:
    if not 0.0 <= iou <= 1.0:
        raise DomainError(f"iou={iou!r} outside [0, 1]")


def iou_loss(iou: float) -> float:
    """1 - IoU."""
    _check_unit(iou)
    return 1.0 - iou


def iou_loss_grad_mag(iou: float) -> float:
    """|d(1 - IoU)/dIoU| = 1, independent of the sample's IoU."""
    _check_unit(iou)
    return 1.0


def riou_grad_mag(iou: float, p: RiouParams) -> float:
    """Hyperbolic gradient magnitude (a*iou + b) + k/(iou - c).

    Zero at both endpoints, strictly positive in between, peaking at
    iou = beta.  The pole at iou = c lies outside [0, 1] (c > 1).
    """
    _check_unit(iou)
    return (p.a * iou + p.b) + p.k / (iou - p.c)


def riou_loss(iou: float, p: RiouParams) -> float:
    """Rectified loss 1 - (a/2*iou^2 + b*iou + k*ln|iou - c| + t).

    Decreases strictly from 1 at iou = 0 to 0 at iou = 1.
    """
    _check_unit(iou)
    return 1.0 - (p.a / 2.0 * iou * iou + p.b * iou + p.k * math.log(abs(iou - p.c)) + p.t)


def giou_loss(pred: Box2D, gt: Box2D) -> float:
    """1 - GIoU, in [0, 2)."""
    return 1.0 - boxgeom.giou_value(pred, gt)


def diou_loss(pred: Box2D, gt: Box2D) -> float:
    """1 - DIoU; the center-distance penalty is intrinsic."""
    return 1.0 - boxgeom.diou_value(pred, gt)


def center_penalty(pred: Box2D, gt: Box2D) -> float:
    """Smooth-L1 of the center distance normalized by the enclosing diagonal.

    smooth-L1(z) = 0.5*z^2 for |z| < 1, |z| - 0.5 otherwise.  For box centers
    z never exceeds 1, so the quadratic branch is the operative one.
    """
    enc = boxgeom.enclosing_box(pred, gt)
    diag2 = enc.width ** 2 + enc.height ** 2
    if diag2 <= 0.0:
        raise DegenerateEnclosure("enclosing box has zero diagonal")
    cp, cg = boxgeom.center(pred), boxgeom.center(gt)
    d2 = (cp.x - cg.x) ** 2 + (cp.y - cg.y) ** 2
    z2 = d2 / diag2
    if z2 < 1.0:
        return 0.5 * z2
    return math.sqrt(z2) - 0.5


def localization_loss(pred: Box2D, gt: Box2D, kind: LossKind) -> float:
    """Scalar localization objective for the given loss kind.

    RIOU adds the center penalty on top of the rectified IoU term; DIOU
    carries its own distance term; IOU and GIOU are the bare losses.
    """
    if kind.name == "IOU":
        return iou_loss(boxgeom.iou(pred, gt))
    if kind.name == "GIOU":
        return giou_loss(pred, gt)
    if kind.name == "DIOU":
        return diou_loss(pred, gt)
    return riou_loss(boxgeom.iou(pred, gt), kind.riou) + center_penalty(pred, gt)


def _riou_coeffs(kind: LossKind) -> tuple[float, float, float, float]:
    if kind.riou is not None:
        p = kind.riou
        return (p.a, p.b, p.k, p.c)
    return (0.0, 0.0, 0.0, 0.0)


def loss_gradient_boxes(pred: Box2D, gt: Box2D, kind: LossKind) -> BoxGradient:
    """Analytic partial derivatives of ``localization_loss`` w.r.t. pred corners.

    At tie configurations (an intersection edge exactly coincident with a
    pred edge) the one-sided derivative from the enclosing side is used, so
    descent stays well-defined; see the kernel module for the convention.
    """
    inter = boxgeom.intersection_area(pred, gt)
    if boxgeom.area(pred) + boxgeom.area(gt) - inter <= 0.0:
        raise UndefinedIoU("both boxes degenerate; gradient undefined")
    ra, rb, rk, rc = _riou_coeffs(kind)
    g = _backend.corner_gradient(
        pred.x_min, pred.y_min, pred.x_max, pred.y_max,
        gt.x_min, gt.y_min, gt.x_max, gt.y_max,
        kind.code, ra, rb, rk, rc,
    )
    return BoxGradient(*g)


def finite_diff_gradient(pred: Box2D, gt: Box2D, kind: LossKind, h: float) -> BoxGradient:
    """Central-difference oracle for ``loss_gradient_boxes``.

    Evaluates the scalar loss at coordinate +/- h per corner; independent of
    the analytic path by construction.
    """
    if h <= 0.0:
        raise DomainError(f"step h={h!r} must be positive")
    coords = [pred.x_min, pred.y_min, pred.x_max, pred.y_max]
    grads = []
    for j in range(4):
        hi = list(coords)
        lo = list(coords)
        hi[j] += h
        lo[j] -= h
        f_hi = localization_loss(Box2D(*hi), gt, kind)
        f_lo = localization_loss(Box2D(*lo), gt, kind)
        grads.append((f_hi - f_lo) / (2.0 * h))
    return BoxGradient(*grads)


def random_differentiable_pair(rng) -> tuple[Box2D, Box2D]:
    """Draw an overlapping pair in general position for gradient checking.

    Rejects configurations with near-coincident edges or a sliver overlap,
    so central differences never straddle a derivative kink.
    """
    while True:
        gcx, gcy = rng.uniform(-5.0, 5.0, 2)
        gw, gh = rng.uniform(0.5, 8.0, 2)
        pw = gw * math.exp(rng.uniform(-0.5, 0.5))
        ph = gh * math.exp(rng.uniform(-0.5, 0.5))
        pcx = gcx + rng.uniform(-0.4, 0.4) * gw
        pcy = gcy + rng.uniform(-0.4, 0.4) * gh
        gt = Box2D(gcx - gw / 2, gcy - gh / 2, gcx + gw / 2, gcy + gh / 2)
        pred = Box2D(pcx - pw / 2, pcy - ph / 2, pcx + pw / 2, pcy + ph / 2)
        iw = min(pred.x_max, gt.x_max) - max(pred.x_min, gt.x_min)
        ih = min(pred.y_max, gt.y_max) - max(pred.y_min, gt.y_min)
        if iw < 1e-2 or ih < 1e-2:
            continue
        gaps = (abs(pred.x_min - gt.x_min), abs(pred.x_max - gt.x_max),
                abs(pred.y_min - gt.y_min), abs(pred.y_max - gt.y_max))
        if min(gaps) < 1e-3:
            continue
        return pred, gt
