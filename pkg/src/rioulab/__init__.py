"""Bounding-box regression loss laboratory.

Core pieces: corner-form box geometry (``boxgeom``), the five-constraint
solver for the rectified-IoU loss shape (``riou_params``), scalar losses and
analytic box-coordinate gradients with a finite-difference oracle
(``losses``), a synthetic regression simulator (``regsim``), and a symbolic
shape checker for the two-pronged pyramid wiring (``pyramidcheck``).

The descent inner loop runs on a compiled kernel when the extension is
built, with a bit-identical pure-Python fallback selected at import; see
``backend_name()``.
"""

from ._backend import backend_name
from .boxgeom import Box2D, Point2D
from .losses import DIOU, GIOU, IOU, LossKind, localization_loss, rectified
from .regsim import PerturbMode, SimConfig, SimReport, run_descent
from .riou_params import RiouParams, residuals, solve_params

__version__ = "0.1.0"

__all__ = [
    "Box2D",
    "Point2D",
    "RiouParams",
    "solve_params",
    "residuals",
    "LossKind",
    "IOU",
    "GIOU",
    "DIOU",
    "rectified",
    "localization_loss",
    "SimConfig",
    "SimReport",
    "PerturbMode",
    "run_descent",
    "backend_name",
    "__version__",
]
