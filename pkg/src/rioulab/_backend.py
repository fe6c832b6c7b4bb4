"""Kernel backend selection: compiled extension if available, else pure Python.

Both backends expose the same functions with bit-identical numerics (see the
equivalence tests).  Selection happens once at import; ``backend_name()``
reports which one is active.
"""

from . import _kernels_py

try:
    from . import _kernels as _impl

    HAVE_COMPILED = True
except ImportError:  # extension not built; fall back to the mirror
    _impl = _kernels_py
    HAVE_COMPILED = False

KIND_IOU = _kernels_py.KIND_IOU
KIND_GIOU = _kernels_py.KIND_GIOU
KIND_DIOU = _kernels_py.KIND_DIOU
KIND_RIOU = _kernels_py.KIND_RIOU

corner_gradient = _impl.corner_gradient
descend_population = _impl.descend_population


def backend_name() -> str:
    return _impl.BACKEND
