"""Lifting 2D conspicuity into voxel space.

Every masked pixel with valid depth is back-projected along its camera
ray to a 3D point; the containing voxel collects the maximum
conspicuity among its pixels.  Voxels the recognizer could already
reach this instant (within its effective range) are then dropped: the
current look either finds the target there or rules them out, so only
beyond-range hints should reshape the belief.
"""

from dataclasses import dataclass, field

import numpy as np

from .camera import pixel_rays
from .geometry import FREE


@dataclass
class VoxelWeights:
    """Sparse conspicuity weights over voxels."""

    geometry: object
    flat_indices: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))
    values: np.ndarray = field(default_factory=lambda: np.zeros(0, np.float64))

    def __len__(self):
        return len(self.flat_indices)

    def items(self):
        for flat, v in zip(self.flat_indices, self.values):
            yield self.geometry.unflatten(flat), float(v)


def conspicuous_to_voxels(consp, mask, view, geometry, occupancy=None,
                          active_mask=None, depth_noise_mm=0.0, rng=None):
    """Back-project masked conspicuity pixels into voxel weights.

    Pixels with depth 0 (no surface) are skipped.  ``occupancy`` and
    ``active_mask``, when given, restrict the result to active Free
    voxels.  ``depth_noise_mm`` adds zero-mean Gaussian noise to the
    depths (off by default; needs ``rng`` when positive).
    """
    consp = np.asarray(consp, dtype=np.float64)
    if consp.shape != view.depth.shape or mask.shape != view.depth.shape:
        raise ValueError("conspicuity, mask and view dimensions differ")
    keep = mask & (view.depth > 0.0)
    if not keep.any():
        return VoxelWeights(geometry=geometry)
    h, w = view.depth.shape
    dirs = pixel_rays(view.camera, w, h)[keep]
    depth = view.depth[keep]
    if depth_noise_mm > 0.0:
        if rng is None:
            raise ValueError("depth noise needs an rng")
        depth = np.maximum(depth + rng.normal(0.0, depth_noise_mm, depth.shape), 0.0)
    points = view.camera.position + dirs * depth[:, None]
    vals = consp[keep]

    rel = (points - geometry.origin) / geometry.voxel_edge_mm
    ijk = np.floor(rel).astype(np.int64)
    dims = np.asarray(geometry.dims)
    inside = np.all((ijk >= 0) & (ijk < dims), axis=1)
    if not inside.any():
        return VoxelWeights(geometry=geometry)
    ijk = ijk[inside]
    vals = vals[inside]
    flat = (ijk[:, 0] * dims[1] + ijk[:, 1]) * dims[2] + ijk[:, 2]
    if occupancy is not None:
        ok = occupancy.labels[flat] == FREE
        flat, vals = flat[ok], vals[ok]
    if active_mask is not None:
        ok = active_mask[flat]
        flat, vals = flat[ok], vals[ok]
    if len(flat) == 0:
        return VoxelWeights(geometry=geometry)
    order = np.argsort(flat, kind="stable")
    flat = flat[order]
    vals = vals[order]
    uniq, starts = np.unique(flat, return_index=True)
    best = np.maximum.reduceat(vals, starts)
    return VoxelWeights(geometry=geometry, flat_indices=uniq, values=best)


def gate_beyond_recognition(weights, camera, model):
    """Drop voxels already inside the recognizer's effective range."""
    if len(weights) == 0:
        return weights
    centers = weights.geometry.centers()[weights.flat_indices]
    d = np.linalg.norm(centers - camera.position, axis=1)
    keep = d > model.effective_range_mm
    return VoxelWeights(geometry=weights.geometry,
                        flat_indices=weights.flat_indices[keep],
                        values=weights.values[keep])
