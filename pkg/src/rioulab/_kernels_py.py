"""Pure-Python descent kernels; fallback mirror of the compiled extension.

The arithmetic here is kept line-for-line identical to ``_kernels.pyx`` (same
operations in the same order, libm for exp/log) so that both backends produce
bit-identical results.  Keep the two files in sync.

Loss kinds are encoded as: 0 = IOU, 1 = GIOU, 2 = DIOU, 3 = RIOU.
The rectified-IoU coefficients (a, b, k, c) are passed explicitly and are
ignored for the other kinds.

Tie convention at coincident edges: a predicted edge defines the intersection
derivative only strictly inside the other box, while union/enclosure treat a
tied predicted edge as active.  This takes the one-sided derivative from the
enclosing side, keeping descent well-defined at kinks.
"""

from math import exp, log, sqrt

BACKEND = "python"

KIND_IOU = 0
KIND_GIOU = 1
KIND_DIOU = 2
KIND_RIOU = 3

# descent state rows are (cx, cy, log w, log h); sizes clamped at 1e-6
_LOG_SIZE_FLOOR = log(1e-6)


def corner_gradient(px1, py1, px2, py2, gx1, gy1, gx2, gy2, kind, ra, rb, rk, rc):
    """Analytic d(loss)/d(pred corner) for one box pair.

    Returns (d/dx_min, d/dy_min, d/dx_max, d/dy_max).
    """
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

    union = area_p + area_g - inter
    iou = inter / union

    da1 = -ph
    da2 = -pw
    da3 = ph
    da4 = pw
    du1 = da1 - di1
    du2 = da2 - di2
    du3 = da3 - di3
    du4 = da4 - di4
    inv_u2 = 1.0 / (union * union)
    dio1 = (di1 * union - inter * du1) * inv_u2
    dio2 = (di2 * union - inter * du2) * inv_u2
    dio3 = (di3 * union - inter * du3) * inv_u2
    dio4 = (di4 * union - inter * du4) * inv_u2

    if kind == KIND_IOU:
        return (-dio1, -dio2, -dio3, -dio4)

    # enclosing box, shared by GIOU / DIOU / the RIOU center penalty
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

    if kind == KIND_GIOU:
        ac = cw * chh
        dac1 = -chh * dc1
        dac2 = -cw * dc2
        dac3 = chh * dc3
        dac4 = cw * dc4
        inv_ac2 = 1.0 / (ac * ac)
        out1 = -(dio1 + (du1 * ac - union * dac1) * inv_ac2)
        out2 = -(dio2 + (du2 * ac - union * dac2) * inv_ac2)
        out3 = -(dio3 + (du3 * ac - union * dac3) * inv_ac2)
        out4 = -(dio4 + (du4 * ac - union * dac4) * inv_ac2)
        return (out1, out2, out3, out4)

    # center-distance geometry for DIOU and the RIOU penalty
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
    # d(d^2/diag^2) per pred corner; d(d^2)/d(corner) = dx or dy
    dq1 = (dx * diag2 - d2 * ddg1) * inv_diag4
    dq2 = (dy * diag2 - d2 * ddg2) * inv_diag4
    dq3 = (dx * diag2 - d2 * ddg3) * inv_diag4
    dq4 = (dy * diag2 - d2 * ddg4) * inv_diag4

    if kind == KIND_DIOU:
        return (-dio1 + dq1, -dio2 + dq2, -dio3 + dq3, -dio4 + dq4)

    # RIOU: rectified gradient on the IoU path plus smooth-L1 center penalty
    gmag = (ra * iou + rb) + rk / (iou - rc)
    z2 = d2 / diag2
    if z2 < 1.0:
        dr1 = 0.5 * dq1
        dr2 = 0.5 * dq2
        dr3 = 0.5 * dq3
        dr4 = 0.5 * dq4
    else:
        # linear branch; unreachable for non-degenerate boxes (z <= 1 always)
        scale = 0.5 / sqrt(z2)
        dr1 = scale * dq1
        dr2 = scale * dq2
        dr3 = scale * dq3
        dr4 = scale * dq4
    return (
        -gmag * dio1 + dr1,
        -gmag * dio2 + dr2,
        -gmag * dio3 + dr3,
        -gmag * dio4 + dr4,
    )


def descend_population(params, gts, kind, ra, rb, rk, rc, lr, steps):
    """Run per-sample gradient descent on center-size box parameters.

    ``params`` is an (n, 4) float64 array of (cx, cy, log w, log h) rows,
    updated in place; ``gts`` is the matching (n, 4) array of fixed
    ground-truth corner boxes.  Samples are processed in index order.
    """
    n = params.shape[0]
    for i in range(n):
        cx = params[i, 0]
        cy = params[i, 1]
        lw = params[i, 2]
        lh = params[i, 3]
        gx1 = gts[i, 0]
        gy1 = gts[i, 1]
        gx2 = gts[i, 2]
        gy2 = gts[i, 3]
        for _ in range(steps):
            w = exp(lw)
            h = exp(lh)
            px1 = cx - 0.5 * w
            px2 = cx + 0.5 * w
            py1 = cy - 0.5 * h
            py2 = cy + 0.5 * h
            g1, g2, g3, g4 = corner_gradient(
                px1, py1, px2, py2, gx1, gy1, gx2, gy2, kind, ra, rb, rk, rc
            )
            gcx = g1 + g3
            gcy = g2 + g4
            glw = 0.5 * w * (g3 - g1)
            glh = 0.5 * h * (g4 - g2)
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
