"""Numba implementations of the numeric hot spots.

The voxel traversal follows the classic incremental scheme: track the
parametric distance to the next boundary crossing per axis and step the
axis with the smallest one.  Ties prefer x, then y, then z; the numpy
fallback applies the same formulas and the same tie rule so both
engines visit identical voxel sequences.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def kde_density(queries, context, weights, sigma):
    """Gaussian kernel density of each query value against a weighted sample.

    density(q) = 1/(sigma*sqrt(2*pi)) * sum_s w_s * exp(-(q - v_s)^2 / (2 sigma^2))
    """
    n = queries.shape[0]
    m = context.shape[0]
    inv2s2 = 1.0 / (2.0 * sigma * sigma)
    norm = 1.0 / (sigma * math.sqrt(2.0 * math.pi))
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        q = queries[i]
        acc = 0.0
        for s in range(m):
            d = q - context[s]
            acc += weights[s] * math.exp(-d * d * inv2s2)
        out[i] = acc * norm
    return out


@njit(cache=True)
def visible_from(labels, nx, ny, nz, ox, oy, oz, edge, cx, cy, cz, txs, tys, tzs):
    """Line-of-sight test from one camera point to many voxel centers.

    A target is visible when no OBSTACLE voxel lies on the straight
    segment before the target's own voxel.  The voxel containing the
    camera participates in the check; the target voxel does not.
    """
    n = txs.shape[0]
    out = np.zeros(n, dtype=np.bool_)
    max_steps = nx + ny + nz + 3
    for q in range(n):
        px = txs[q]
        py = tys[q]
        pz = tzs[q]
        ix = int(math.floor((cx - ox) / edge))
        iy = int(math.floor((cy - oy) / edge))
        iz = int(math.floor((cz - oz) / edge))
        jx = int(math.floor((px - ox) / edge))
        jy = int(math.floor((py - oy) / edge))
        jz = int(math.floor((pz - oz) / edge))
        dx = px - cx
        dy = py - cy
        dz = pz - cz
        sx = 1 if dx > 0.0 else -1
        sy = 1 if dy > 0.0 else -1
        sz = 1 if dz > 0.0 else -1
        big = 1e300
        if dx != 0.0:
            bx = ox + (ix + (1 if sx > 0 else 0)) * edge
            tmx = (bx - cx) / dx
            tdx = sx * edge / dx
        else:
            tmx = big
            tdx = big
        if dy != 0.0:
            by = oy + (iy + (1 if sy > 0 else 0)) * edge
            tmy = (by - cy) / dy
            tdy = sy * edge / dy
        else:
            tmy = big
            tdy = big
        if dz != 0.0:
            bz = oz + (iz + (1 if sz > 0 else 0)) * edge
            tmz = (bz - cz) / dz
            tdz = sz * edge / dz
        else:
            tmz = big
            tdz = big
        ok = True
        steps = 0
        while not (ix == jx and iy == jy and iz == jz):
            if labels[(ix * ny + iy) * nz + iz] == 1:
                ok = False
                break
            if tmx <= tmy and tmx <= tmz:
                ix += sx
                tmx += tdx
            elif tmy <= tmz:
                iy += sy
                tmy += tdy
            else:
                iz += sz
                tmz += tdz
            steps += 1
            if steps > max_steps:
                ok = False
                break
        out[q] = ok
    return out
