"""Scenes built from axis-aligned colored boxes, and their voxelization.

A scene is a room (axis-aligned extent starting at the world origin),
opaque obstacle boxes, distractor boxes, and one target box with a
facing direction.  Only obstacles occlude sight and occupy voxels: the
target and distractors are small free-standing objects the camera must
be able to see, so their voxels stay Free.
"""

from dataclasses import dataclass, field

import numpy as np

from .geometry import FREE, OBSTACLE, GridGeometry, OccupancyMap


@dataclass(frozen=True)
class Box:
    lo_mm: tuple
    hi_mm: tuple
    color: tuple = (128, 128, 128)

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo_mm)
        hi = tuple(float(v) for v in self.hi_mm)
        if any(h <= l for l, h in zip(lo, hi)):
            raise ValueError("box needs positive extent on every axis")
        object.__setattr__(self, "lo_mm", lo)
        object.__setattr__(self, "hi_mm", hi)
        object.__setattr__(self, "color", tuple(int(c) for c in self.color))

    @classmethod
    def centered(cls, center_mm, size_mm, color=(128, 128, 128)):
        c = np.asarray(center_mm, dtype=np.float64)
        s = np.asarray(size_mm, dtype=np.float64)
        return cls(tuple(c - s / 2), tuple(c + s / 2), color)

    @property
    def lo(self):
        return np.asarray(self.lo_mm, dtype=np.float64)

    @property
    def hi(self):
        return np.asarray(self.hi_mm, dtype=np.float64)

    @property
    def center(self):
        return tuple((l + h) / 2.0 for l, h in zip(self.lo_mm, self.hi_mm))

    @property
    def size_mm(self):
        return tuple(h - l for l, h in zip(self.lo_mm, self.hi_mm))

    def contains_points(self, points):
        p = np.atleast_2d(np.asarray(points, dtype=np.float64))
        return np.all((p >= self.lo) & (p <= self.hi), axis=1)

    def overlaps(self, other):
        return all(l1 < h2 and l2 < h1 for l1, h1, l2, h2 in
                   zip(self.lo_mm, self.hi_mm, other.lo_mm, other.hi_mm))


@dataclass(frozen=True)
class TargetBox(Box):
    facing: tuple = (1.0, 0.0, 0.0)

    def __post_init__(self):
        super().__post_init__()
        f = np.asarray(self.facing, dtype=np.float64)
        n = np.linalg.norm(f)
        if n == 0:
            raise ValueError("facing must be a nonzero vector")
        if abs(n - 1.0) > 1e-12:
            f = f / n
        object.__setattr__(self, "facing", tuple(f))


@dataclass(frozen=True)
class Scene:
    room_extent_mm: tuple
    target: TargetBox
    obstacles: tuple = field(default_factory=tuple)
    distractors: tuple = field(default_factory=tuple)
    background: tuple = (235, 230, 220)

    def __post_init__(self):
        object.__setattr__(self, "room_extent_mm",
                           tuple(float(v) for v in self.room_extent_mm))
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        object.__setattr__(self, "distractors", tuple(self.distractors))
        object.__setattr__(self, "background", tuple(int(c) for c in self.background))
        ext = self.room_extent_mm
        if any(v <= 0 for v in ext):
            raise ValueError("room extent must be positive")
        if any(l < 0 or h > e for l, h, e in
               zip(self.target.lo_mm, self.target.hi_mm, ext)):
            raise ValueError("target must sit inside the room")

    def boxes(self):
        """All renderable boxes, target last."""
        return list(self.obstacles) + list(self.distractors) + [self.target]


def scene_occupancy(scene, voxel_edge_mm):
    """Voxelize a scene: grid over the room, OBSTACLE where an obstacle
    box contains the voxel center, FREE elsewhere."""
    dims = tuple(int(np.ceil(e / voxel_edge_mm - 1e-9)) for e in scene.room_extent_mm)
    geometry = GridGeometry(origin_mm=(0.0, 0.0, 0.0), voxel_edge_mm=voxel_edge_mm,
                            dims=dims)
    labels = np.full(geometry.n_voxels, FREE, dtype=np.uint8)
    if scene.obstacles:
        centers = geometry.centers()
        hit = np.zeros(geometry.n_voxels, dtype=bool)
        for box in scene.obstacles:
            hit |= box.contains_points(centers)
        labels[hit] = OBSTACLE
    return geometry, OccupancyMap(geometry, labels)
