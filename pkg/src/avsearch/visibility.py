"""Influence ranges: which voxels a camera action can affect.

The influence set of an action contains every active Free voxel whose
center is inside the view frustum, within the sensing range, and not
hidden behind an obstacle.  Each entry carries the belief-side
detection probability b for that voxel (zero beyond the recognizer's
effective range but still inside the sensing range, where only the
stereo head sees).

The planner evaluates 12 actions per position, so the range and
occlusion passes (shared by all actions at one position) are factored
out and reused; `influence_range` chains the exact same helpers, which
keeps the public operation and the planner's batched path identical.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import engine
from .camera import _frustum_mask_from_delta, frustum_union_mask
from .geometry import FREE


@dataclass
class InfluenceSet:
    """Voxels an action can observe, with their detection probabilities."""

    geometry: object
    flat_indices: np.ndarray
    b: np.ndarray

    def __len__(self):
        return len(self.flat_indices)

    def entries(self):
        """Iterate (voxel index triple, b) pairs."""
        for flat, b in zip(self.flat_indices, self.b):
            yield self.geometry.unflatten(flat), float(b)

    def contains(self, ijk):
        return bool(np.any(self.flat_indices == self.geometry.flat_index(ijk)))


@lru_cache(maxsize=8)
def grid_centers(geometry):
    """Voxel centers for a grid, cached per geometry."""
    c = geometry.centers()
    c.setflags(write=False)
    return c


def range_candidates(geometry, occupancy, active_mask, position_mm, max_range_mm):
    """Flat ids of active Free voxels within max_range of a position."""
    centers = grid_centers(geometry)
    pos = np.asarray(position_mm, dtype=np.float64)
    d2 = ((centers - pos) ** 2).sum(axis=1)
    mask = (occupancy.labels == FREE) & (d2 <= max_range_mm * max_range_mm)
    if active_mask is not None:
        mask &= active_mask
    return np.flatnonzero(mask)


def visible_subset(geometry, occupancy, position_mm, cand_idx):
    """Line-of-sight mask over candidate voxels from one viewpoint."""
    if len(cand_idx) == 0:
        return np.zeros(0, dtype=bool)
    k = engine.kernels()
    centers = grid_centers(geometry)
    nx, ny, nz = geometry.dims
    ox, oy, oz = geometry.origin_mm
    pos = np.asarray(position_mm, dtype=np.float64)
    return k.visible_from(occupancy.labels, nx, ny, nz, ox, oy, oz,
                          geometry.voxel_edge_mm, pos[0], pos[1], pos[2],
                          np.ascontiguousarray(centers[cand_idx, 0]),
                          np.ascontiguousarray(centers[cand_idx, 1]),
                          np.ascontiguousarray(centers[cand_idx, 2]))


def influence_for_cameras(geometry, occupancy, active_mask, cameras, model,
                          max_range_mm):
    """Influence sets for several cameras sharing one position.

    The range and occlusion passes run once; each camera contributes
    only its frustum test.  The stored b values equal what
    detection_value would return for the same voxel centers (the
    subexpressions are evaluated the same way).
    """
    if not cameras:
        return []
    position = cameras[0].position_mm
    cand = range_candidates(geometry, occupancy, active_mask, position, max_range_mm)
    vis = visible_subset(geometry, occupancy, position, cand)
    cand = cand[vis]
    centers = grid_centers(geometry)
    delta = centers[cand] - cameras[0].position
    d = np.linalg.norm(delta, axis=1)
    out = []
    for cam in cameras:
        if cam.position_mm != position:
            raise ValueError("cameras must share one position")
        if len(cand):
            keep = _frustum_mask_from_delta(cam, delta)
            idx = cand[keep]
            dk = d[keep]
            falloff = 1.0 - (dk / model.effective_range_mm) ** model.range_falloff_exponent
            b = np.where(dk <= model.effective_range_mm,
                         model.peak_prob * np.clip(falloff, 0.0, 1.0), 0.0)
        else:
            idx = cand
            b = np.zeros(0)
        out.append(InfluenceSet(geometry=geometry, flat_indices=idx, b=b))
    return out


def influence_range(camera, model, geometry, occupancy, max_range_mm,
                    active_mask=None):
    """Influence set of a single camera action.

    ``active_mask`` restricts the search region (Growing mode); None
    means every Free voxel is active.
    """
    if max_range_mm < model.effective_range_mm:
        raise ValueError("max_range_mm must cover the recognizer's range")
    return influence_for_cameras(geometry, occupancy, active_mask, [camera],
                                 model, max_range_mm)[0]


def position_union_ids(geometry, occupancy, active_mask, position_mm, cameras,
                       max_range_mm):
    """Ascending flat ids of the union of influence sets at a position.

    Equals the set union of `influence_for_cameras` memberships: the
    candidate and occlusion passes are shared, the frustum filter is
    the union over cameras.
    """
    cand = range_candidates(geometry, occupancy, active_mask, position_mm,
                            max_range_mm)
    if len(cand) == 0:
        return cand
    centers = grid_centers(geometry)
    keep = cand[frustum_union_mask(cameras, centers[cand])]
    if len(keep) == 0:
        return keep
    vis = visible_subset(geometry, occupancy, position_mm, keep)
    return keep[vis]


def segment_clear(occupancy, from_mm, to_mm):
    """True when no obstacle voxel intersects the straight segment.

    The voxel containing ``to_mm`` itself is not tested (callers check
    the destination label separately).
    """
    geometry = occupancy.geometry
    k = engine.kernels()
    nx, ny, nz = geometry.dims
    ox, oy, oz = geometry.origin_mm
    a = np.asarray(from_mm, dtype=np.float64)
    b = np.asarray(to_mm, dtype=np.float64)
    res = k.visible_from(occupancy.labels, nx, ny, nz, ox, oy, oz,
                         geometry.voxel_edge_mm, a[0], a[1], a[2],
                         np.array([b[0]]), np.array([b[1]]), np.array([b[2]]))
    return bool(res[0])
