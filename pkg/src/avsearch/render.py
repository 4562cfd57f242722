"""Raycasting renderer: nearest box hit per pixel, RGB plus depth.

Depth is the Euclidean distance in mm along the pixel's central ray to
the first box surface, with 0 as the no-hit sentinel.  Boxes are tested
in scene order; the earliest listed box wins exact distance ties.
"""

from dataclasses import dataclass

import numpy as np

from .camera import pixel_rays

NEAR_PLANE_MM = 1.0


@dataclass(frozen=True)
class RenderedView:
    rgb: np.ndarray      # (H, W, 3) uint8
    depth: np.ndarray    # (H, W) float64 mm, 0 = no hit
    camera: object


def _slab_hits(origin, dirs, box):
    """Entry distance of each ray into an axis-aligned box, inf on miss."""
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = (box.lo[None, :] - origin[None, :]) / dirs
        t2 = (box.hi[None, :] - origin[None, :]) / dirs
    # Rays parallel to a slab: inside -> (-inf, inf), outside -> empty.
    par = dirs == 0.0
    if par.any():
        inside = (origin[None, :] >= box.lo[None, :]) & (origin[None, :] <= box.hi[None, :])
        t1 = np.where(par, np.where(inside, -np.inf, np.inf), t1)
        t2 = np.where(par, np.where(inside, np.inf, -np.inf), t2)
    t_near = np.minimum(t1, t2).max(axis=1)
    t_far = np.maximum(t1, t2).min(axis=1)
    t_hit = np.maximum(t_near, NEAR_PLANE_MM)
    hit = t_far >= t_hit
    return np.where(hit, t_hit, np.inf)


def render(scene, camera, width=64, height=64):
    """Render the scene from a camera pose."""
    if width < 16 or height < 16:
        raise ValueError("render needs width, height >= 16")
    dirs = pixel_rays(camera, width, height).reshape(-1, 3)
    origin = camera.position
    best_t = np.full(dirs.shape[0], np.inf)
    color = np.empty((dirs.shape[0], 3), dtype=np.uint8)
    color[:] = np.asarray(scene.background, dtype=np.uint8)
    for box in scene.boxes():
        t = _slab_hits(origin, dirs, box)
        closer = t < best_t
        if closer.any():
            best_t[closer] = t[closer]
            color[closer] = np.asarray(box.color, dtype=np.uint8)
    depth = np.where(np.isfinite(best_t), best_t, 0.0)
    return RenderedView(rgb=color.reshape(height, width, 3),
                        depth=depth.reshape(height, width),
                        camera=camera)
