"""Voxel grid geometry and occupancy labels.

The world is an axis-aligned grid of cubic voxels in millimeters, z up.
A voxel is addressed either by integer index triple ``(i, j, k)`` or by
its flat C-order id ``(i * ny + j) * nz + k``; all array-valued state in
the package (occupancy labels, belief mass, activity masks) is stored
flat in that order.
"""

from dataclasses import dataclass

import numpy as np

# Occupancy labels.
FREE = 0        # target may be here, camera rays pass through
OBSTACLE = 1    # blocks sight, cannot contain the target
OUTSIDE = 2    # beyond the region of interest


@dataclass(frozen=True)
class GridGeometry:
    """Placement of a voxel grid in the world.

    origin_mm: world coordinates of the grid's minimum corner.
    voxel_edge_mm: edge length of the cubic voxels.
    dims: voxel counts (nx, ny, nz).
    """

    origin_mm: tuple
    voxel_edge_mm: float
    dims: tuple

    def __post_init__(self):
        if self.voxel_edge_mm <= 0:
            raise ValueError("voxel_edge_mm must be positive")
        if len(self.dims) != 3 or any(int(d) <= 0 for d in self.dims):
            raise ValueError("dims must be three positive integers")
        object.__setattr__(self, "origin_mm", tuple(float(v) for v in self.origin_mm))
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))

    @property
    def n_voxels(self):
        nx, ny, nz = self.dims
        return nx * ny * nz

    @property
    def origin(self):
        return np.asarray(self.origin_mm, dtype=np.float64)

    @property
    def extent_mm(self):
        return tuple(d * self.voxel_edge_mm for d in self.dims)

    def centers(self):
        """(n_voxels, 3) array of voxel center world coordinates, flat order."""
        nx, ny, nz = self.dims
        e = self.voxel_edge_mm
        i, j, k = np.meshgrid(np.arange(nx), np.arange(ny), np.arange(nz), indexing="ij")
        out = np.empty((self.n_voxels, 3), dtype=np.float64)
        out[:, 0] = self.origin_mm[0] + (i.ravel() + 0.5) * e
        out[:, 1] = self.origin_mm[1] + (j.ravel() + 0.5) * e
        out[:, 2] = self.origin_mm[2] + (k.ravel() + 0.5) * e
        return out

    def flat_index(self, ijk):
        i, j, k = ijk
        nx, ny, nz = self.dims
        return (i * ny + j) * nz + k

    def unflatten(self, flat):
        nx, ny, nz = self.dims
        i, rem = divmod(int(flat), ny * nz)
        j, k = divmod(rem, nz)
        return (i, j, k)

    def voxel_center(self, ijk):
        e = self.voxel_edge_mm
        return np.array(
            [self.origin_mm[a] + (ijk[a] + 0.5) * e for a in range(3)], dtype=np.float64
        )

    def point_to_index(self, point_mm):
        """Voxel index containing a world point, or None when outside the grid."""
        p = np.asarray(point_mm, dtype=np.float64)
        rel = (p - self.origin) / self.voxel_edge_mm
        ijk = np.floor(rel).astype(np.int64)
        if np.any(ijk < 0) or np.any(ijk >= np.asarray(self.dims)):
            return None
        return tuple(int(v) for v in ijk)

    def contains_point(self, point_mm):
        return self.point_to_index(point_mm) is not None


class OccupancyMap:
    """Per-voxel labels (FREE / OBSTACLE / OUTSIDE) over a grid."""

    def __init__(self, geometry, labels):
        labels = np.asarray(labels, dtype=np.uint8)
        if labels.shape == tuple(geometry.dims):
            labels = labels.ravel()
        if labels.shape != (geometry.n_voxels,):
            raise ValueError("labels shape does not match grid dims")
        if labels.max(initial=0) > OUTSIDE:
            raise ValueError("labels must be FREE, OBSTACLE or OUTSIDE")
        self.geometry = geometry
        self.labels = labels

    @classmethod
    def all_free(cls, geometry):
        return cls(geometry, np.zeros(geometry.n_voxels, dtype=np.uint8))

    @property
    def free_mask(self):
        return self.labels == FREE

    @property
    def obstacle_mask(self):
        return self.labels == OBSTACLE

    def label_at(self, ijk):
        return int(self.labels[self.geometry.flat_index(ijk)])

    def grid(self):
        """Labels reshaped to (nx, ny, nz)."""
        return self.labels.reshape(self.geometry.dims)
