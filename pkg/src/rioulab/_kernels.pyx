# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled descent kernels; hot-loop twin of ``_kernels_py``.

The arithmetic mirrors the pure-Python module line for line (same operations,
same order, libm for exp/log) so both backends produce bit-identical results;
the extension is compiled with -ffp-contract=off to rule out FMA rewrites.
Keep the two files in sync.
"""

from libc.math cimport exp, log, sqrt

BACKEND = "compiled"

KIND_IOU = 0
KIND_GIOU = 1
KIND_DIOU = 2
KIND_RIOU = 3

cdef double _LOG_SIZE_FLOOR = log(1e-6)


cdef inline void _corner_grad(
    double px1, double py1, double px2, double py2,
    double gx1, double gy1, double gx2, double gy2,
    int kind, double ra, double rb, double rk, double rc,
    double* out,
) noexcept nogil:
    cdef double pw, ph, gw, gh, area_p, area_g
    cdef double ix1, iy1, ix2, iy2, iw, ih, inter
    cdef double di1, di2, di3, di4
    cdef double union_, iou, da1, da2, da3, da4, du1, du2, du3, du4
    cdef double inv_u2, dio1, dio2, dio3, dio4
    cdef double cx1, cy1, cx2, cy2, cw, chh, dc1, dc2, dc3, dc4
    cdef double ac, dac1, dac2, dac3, dac4, inv_ac2
    cdef double pcx, pcy, gcx, gcy, dx, dy, d2, diag2
    cdef double ddg1, ddg2, ddg3, ddg4, inv_diag4, dq1, dq2, dq3, dq4
    cdef double gmag, z2, dr1, dr2, dr3, dr4, scale

    pw = px2 - px1
    ph = py2 - py1
    gw = gx2 - gx1
    gh = gy2 - gy1
    area_p = pw * ph
    area_g = gw * gh

    ix1 = px1 if px1 > gx1 else gx1
    iy1 = py1 if py1 > gy1 else gy1
    ix2 = px2 if px2 < gx2 else gx2
    iy2 = py2 if py2 < gy2 else gy2
    iw = ix2 - ix1
    ih = iy2 - iy1

    if iw > 0.0 and ih > 0.0:
        inter = iw * ih
        di1 = -ih if px1 > gx1 else 0.0
        di2 = -iw if py1 > gy1 else 0.0
        di3 = ih if px2 < gx2 else 0.0
        di4 = iw if py2 < gy2 else 0.0
    else:
        inter = 0.0
        di1 = 0.0
        di2 = 0.0
        di3 = 0.0
        di4 = 0.0

    union_ = area_p + area_g - inter
    iou = inter / union_

    da1 = -ph
    da2 = -pw
    da3 = ph
    da4 = pw
    du1 = da1 - di1
    du2 = da2 - di2
    du3 = da3 - di3
    du4 = da4 - di4
    inv_u2 = 1.0 / (union_ * union_)
    dio1 = (di1 * union_ - inter * du1) * inv_u2
    dio2 = (di2 * union_ - inter * du2) * inv_u2
    dio3 = (di3 * union_ - inter * du3) * inv_u2
    dio4 = (di4 * union_ - inter * du4) * inv_u2

    if kind == 0:  # IOU
        out[0] = -dio1
        out[1] = -dio2
        out[2] = -dio3
        out[3] = -dio4
        return

    cx1 = px1 if px1 < gx1 else gx1
    cy1 = py1 if py1 < gy1 else gy1
    cx2 = px2 if px2 > gx2 else gx2
    cy2 = py2 if py2 > gy2 else gy2
    cw = cx2 - cx1
    chh = cy2 - cy1
    dc1 = 1.0 if px1 <= gx1 else 0.0
    dc2 = 1.0 if py1 <= gy1 else 0.0
    dc3 = 1.0 if px2 >= gx2 else 0.0
    dc4 = 1.0 if py2 >= gy2 else 0.0

    if kind == 1:  # GIOU
        ac = cw * chh
        dac1 = -chh * dc1
        dac2 = -cw * dc2
        dac3 = chh * dc3
        dac4 = cw * dc4
        inv_ac2 = 1.0 / (ac * ac)
        out[0] = -(dio1 + (du1 * ac - union_ * dac1) * inv_ac2)
        out[1] = -(dio2 + (du2 * ac - union_ * dac2) * inv_ac2)
        out[2] = -(dio3 + (du3 * ac - union_ * dac3) * inv_ac2)
        out[3] = -(dio4 + (du4 * ac - union_ * dac4) * inv_ac2)
        return

    pcx = 0.5 * (px1 + px2)
    pcy = 0.5 * (py1 + py2)
    gcx = 0.5 * (gx1 + gx2)
    gcy = 0.5 * (gy1 + gy2)
    dx = pcx - gcx
    dy = pcy - gcy
    d2 = dx * dx + dy * dy
    diag2 = cw * cw + chh * chh
    ddg1 = -2.0 * cw * dc1
    ddg2 = -2.0 * chh * dc2
    ddg3 = 2.0 * cw * dc3
    ddg4 = 2.0 * chh * dc4
    inv_diag4 = 1.0 / (diag2 * diag2)
    dq1 = (dx * diag2 - d2 * ddg1) * inv_diag4
    dq2 = (dy * diag2 - d2 * ddg2) * inv_diag4
    dq3 = (dx * diag2 - d2 * ddg3) * inv_diag4
    dq4 = (dy * diag2 - d2 * ddg4) * inv_diag4

    if kind == 2:  # DIOU
        out[0] = -dio1 + dq1
        out[1] = -dio2 + dq2
        out[2] = -dio3 + dq3
        out[3] = -dio4 + dq4
        return

    # RIOU
    gmag = (ra * iou + rb) + rk / (iou - rc)
    z2 = d2 / diag2
    if z2 < 1.0:
        dr1 = 0.5 * dq1
        dr2 = 0.5 * dq2
        dr3 = 0.5 * dq3
        dr4 = 0.5 * dq4
    else:
        scale = 0.5 / sqrt(z2)
        dr1 = scale * dq1
        dr2 = scale * dq2
        dr3 = scale * dq3
        dr4 = scale * dq4
    out[0] = -gmag * dio1 + dr1
    out[1] = -gmag * dio2 + dr2
    out[2] = -gmag * dio3 + dr3
    out[3] = -gmag * dio4 + dr4


def corner_gradient(
    double px1, double py1, double px2, double py2,
    double gx1, double gy1, double gx2, double gy2,
    int kind, double ra, double rb, double rk, double rc,
):
    """Analytic d(loss)/d(pred corner) for one box pair."""
    cdef double out[4]
    _corner_grad(px1, py1, px2, py2, gx1, gy1, gx2, gy2, kind, ra, rb, rk, rc, out)
    return (out[0], out[1], out[2], out[3])


def descend_population(
    double[:, ::1] params, double[:, ::1] gts,
    int kind, double ra, double rb, double rk, double rc,
    double lr, int steps,
):
    """Per-sample gradient descent on (cx, cy, log w, log h) rows, in place."""
    cdef Py_ssize_t n = params.shape[0]
    cdef Py_ssize_t i
    cdef int step
    cdef double cx, cy, lw, lh, gx1, gy1, gx2, gy2
    cdef double w, h, px1, px2, py1, py2, gcx, gcy, glw, glh
    cdef double g[4]
    with nogil:
        for i in range(n):
            cx = params[i, 0]
            cy = params[i, 1]
            lw = params[i, 2]
            lh = params[i, 3]
            gx1 = gts[i, 0]
            gy1 = gts[i, 1]
            gx2 = gts[i, 2]
            gy2 = gts[i, 3]
            for step in range(steps):
                w = exp(lw)
                h = exp(lh)
                px1 = cx - 0.5 * w
                px2 = cx + 0.5 * w
                py1 = cy - 0.5 * h
                py2 = cy + 0.5 * h
                _corner_grad(px1, py1, px2, py2, gx1, gy1, gx2, gy2,
                             kind, ra, rb, rk, rc, g)
                gcx = g[0] + g[2]
                gcy = g[1] + g[3]
                glw = 0.5 * w * (g[2] - g[0])
                glh = 0.5 * h * (g[3] - g[1])
                cx = cx - lr * gcx
                cy = cy - lr * gcy
                lw = lw - lr * glw
                lh = lh - lr * glh
                if lw < _LOG_SIZE_FLOOR:
                    lw = _LOG_SIZE_FLOOR
                if lh < _LOG_SIZE_FLOOR:
                    lh = _LOG_SIZE_FLOOR
            params[i, 0] = cx
            params[i, 1] = cy
            params[i, 2] = lw
            params[i, 3] = lh
