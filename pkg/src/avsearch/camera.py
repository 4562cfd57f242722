"""Camera pose, axes and frustum membership.

World frame: x/y horizontal, z up, millimeters.  A camera pose is a
position plus pan (rotation about z, 0 = +x) and tilt (0 = horizontal,
positive = up).  The optical axis for pan p and tilt t is

    forward = (cos t cos p,  cos t sin p,  sin t)
    right   = (sin p, -cos p, 0)
    up      = right x forward

A point is inside the frustum when it lies strictly in front of the
camera and its angular offsets from the axis are at most fov_w/2
horizontally and fov_h/2 vertically.
"""

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CameraConfig:
    position_mm: tuple
    pan: float
    tilt: float
    fov_w: float
    fov_h: float

    def __post_init__(self):
        if not (0.0 < self.fov_w < math.pi and 0.0 < self.fov_h < math.pi):
            raise ValueError("fov_w and fov_h must lie in (0, pi)")
        object.__setattr__(self, "position_mm",
                           tuple(float(v) for v in self.position_mm))

    @property
    def position(self):
        return np.asarray(self.position_mm, dtype=np.float64)


@dataclass(frozen=True)
class Operation:
    """One sensing action: a camera pose run through a recognizer."""

    camera: CameraConfig
    recognizer_id: str
    cost_s: float

    def __post_init__(self):
        if self.cost_s <= 0:
            raise ValueError("cost_s must be positive")


def camera_axes(pan, tilt):
    """(right, up, forward) unit vectors for a pan/tilt pose."""
    cp, sp = math.cos(pan), math.sin(pan)
    ct, st = math.cos(tilt), math.sin(tilt)
    forward = np.array([ct * cp, ct * sp, st])
    right = np.array([sp, -cp, 0.0])
    up = np.array([-st * cp, -st * sp, ct])
    return right, up, forward


def camera_frame(camera, points):
    """Project world points into the camera frame.

    Returns (dcx, dcy, dcz): right / up / forward components of the
    offsets from the camera position, each shaped like points[:, 0].
    """
    r, u, f = camera_axes(camera.pan, camera.tilt)
    delta = np.atleast_2d(points) - camera.position
    return delta @ r, delta @ u, delta @ f


def _frustum_mask_from_delta(camera, delta):
    """Frustum test on precomputed offsets from the camera position."""
    r, u, f = camera_axes(camera.pan, camera.tilt)
    dcx = delta @ r
    dcy = delta @ u
    dcz = delta @ f
    tw = math.tan(camera.fov_w / 2.0)
    th = math.tan(camera.fov_h / 2.0)
    inside = (dcz > 0.0) & (np.abs(dcx) <= tw * dcz) & (np.abs(dcy) <= th * dcz)
    at_camera = (dcx == 0.0) & (dcy == 0.0) & (dcz == 0.0)
    return inside | at_camera


def in_frustum(camera, points):
    """Boolean frustum membership for an (n, 3) array of world points.

    A point coincident with the camera position counts as inside (its
    angular offset is taken to be zero).
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    return _frustum_mask_from_delta(camera, points - camera.position)


def frustum_union_mask(cameras, points):
    """Membership in the union of several frustums sharing one position."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    delta = points - cameras[0].position
    acc = np.zeros(len(points), dtype=bool)
    for cam in cameras:
        if cam.position_mm != cameras[0].position_mm:
            raise ValueError("cameras must share one position")
        acc |= _frustum_mask_from_delta(cam, delta)
    return acc


def pixel_rays(camera, width, height):
    """Unit direction of every pixel's central ray, shape (height, width, 3).

    Pixel (0, 0) is the top-left: columns increase to the right, rows
    increase downward.
    """
    r, u, f = camera_axes(camera.pan, camera.tilt)
    tw = math.tan(camera.fov_w / 2.0)
    th = math.tan(camera.fov_h / 2.0)
    xs = (2.0 * (np.arange(width) + 0.5) / width - 1.0) * tw
    ys = (1.0 - 2.0 * (np.arange(height) + 0.5) / height) * th
    dirs = (f[None, None, :]
            + xs[None, :, None] * r[None, None, :]
            + ys[:, None, None] * u[None, None, :])
    dirs /= np.linalg.norm(dirs, axis=2, keepdims=True)
    return dirs
