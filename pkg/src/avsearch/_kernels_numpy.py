"""Pure numpy fallbacks for the numeric hot spots.

Mirrors `_kernels_numba`: same formulas, same traversal tie rules.  The
voxel walk advances all rays in lockstep, so results are identical to
the scalar version while staying vectorized.
"""

import math

import numpy as np


def kde_density(queries, context, weights, sigma):
    """Gaussian kernel density of each query value against a weighted sample."""
    inv2s2 = 1.0 / (2.0 * sigma * sigma)
    norm = 1.0 / (sigma * math.sqrt(2.0 * math.pi))
    out = np.empty(queries.shape[0], dtype=np.float64)
    # Chunk the queries to bound the (chunk x context) scratch matrix.
    chunk = max(1, min(len(queries), 8 * 1024 * 1024 // max(1, 8 * len(context))))
    for lo in range(0, len(queries), chunk):
        d = queries[lo:lo + chunk, None] - context[None, :]
        np.multiply(d, d, out=d)
        np.multiply(d, -inv2s2, out=d)
        np.exp(d, out=d)
        out[lo:lo + chunk] = d @ weights
    out *= norm
    return out


def visible_from(labels, nx, ny, nz, ox, oy, oz, edge, cx, cy, cz, txs, tys, tzs):
    """Line-of-sight test from one camera point to many voxel centers."""
    n = txs.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.bool_)
    ix0 = int(math.floor((cx - ox) / edge))
    iy0 = int(math.floor((cy - oy) / edge))
    iz0 = int(math.floor((cz - oz) / edge))
    ix = np.full(n, ix0, dtype=np.int64)
    iy = np.full(n, iy0, dtype=np.int64)
    iz = np.full(n, iz0, dtype=np.int64)
    jx = np.floor((txs - ox) / edge).astype(np.int64)
    jy = np.floor((tys - oy) / edge).astype(np.int64)
    jz = np.floor((tzs - oz) / edge).astype(np.int64)
    dx = txs - cx
    dy = tys - cy
    dz = tzs - cz
    sx = np.where(dx > 0.0, 1, -1).astype(np.int64)
    sy = np.where(dy > 0.0, 1, -1).astype(np.int64)
    sz = np.where(dz > 0.0, 1, -1).astype(np.int64)
    big = 1e300

    def axis_init(d, s, i0, o, c):
        with np.errstate(divide="ignore", invalid="ignore"):
            bound = o + (i0 + (s > 0)) * edge
            tm = np.where(d != 0.0, (bound - c) / d, big)
            td = np.where(d != 0.0, s * edge / d, big)
        return tm, td

    tmx, tdx = axis_init(dx, sx, ix, ox, cx)
    tmy, tdy = axis_init(dy, sy, iy, oy, cy)
    tmz, tdz = axis_init(dz, sz, iz, oz, cz)

    visible = np.ones(n, dtype=np.bool_)
    active = np.ones(n, dtype=np.bool_)
    max_steps = nx + ny + nz + 3
    for _ in range(max_steps + 1):
        arrived = active & (ix == jx) & (iy == jy) & (iz == jz)
        active &= ~arrived
        if not active.any():
            break
        flat = (ix * ny + iy) * nz + iz
        blocked = active & (labels[flat] == 1)
        visible[blocked] = False
        active &= ~blocked
        if not active.any():
            break
        step_x = active & (tmx <= tmy) & (tmx <= tmz)
        step_y = active & ~step_x & (tmy <= tmz)
        step_z = active & ~step_x & ~step_y
        ix[step_x] += sx[step_x]
        tmx[step_x] += tdx[step_x]
        iy[step_y] += sy[step_y]
        tmy[step_y] += tdy[step_y]
        iz[step_z] += sz[step_z]
        tmz[step_z] += tdz[step_z]
    visible[active] = False  # exceeded the step bound
    return visible
