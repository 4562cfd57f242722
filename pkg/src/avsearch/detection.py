"""Parametric detection probability and simulated recognition.

The recognizer detects a visible target with probability

    b = b0 * clamp(1 - (d / R_rec)^e, 0, 1)

inside its effective range R_rec and the camera frustum, and 0 beyond
either.  When the target's facing direction is known (simulation side)
a hard pose gate additionally requires the facing to oppose the viewing
axis within ``max_pose_angle``.  The planner's belief-side values pass
``facing=None``: the searcher does not know the true orientation.
"""

import math
from dataclasses import dataclass

import numpy as np

from .camera import camera_axes, in_frustum


@dataclass(frozen=True)
class DetectionModel:
    effective_range_mm: float = 3000.0
    peak_prob: float = 0.9
    max_pose_angle: float = math.pi / 4
    range_falloff_exponent: float = 2.0

    def __post_init__(self):
        if self.effective_range_mm <= 0:
            raise ValueError("effective_range_mm must be positive")
        if not 0.0 < self.peak_prob <= 1.0:
            raise ValueError("peak_prob must be in (0, 1]")
        if self.range_falloff_exponent < 0:
            raise ValueError("range_falloff_exponent must be non-negative")


def detection_values(voxel_centers, camera, model):
    """Vectorized belief-side b for an (n, 3) array of voxel centers."""
    centers = np.atleast_2d(np.asarray(voxel_centers, dtype=np.float64))
    d = np.linalg.norm(centers - camera.position, axis=1)
    b = np.zeros(len(centers), dtype=np.float64)
    ok = in_frustum(camera, centers) & (d <= model.effective_range_mm)
    if ok.any():
        falloff = 1.0 - (d[ok] / model.effective_range_mm) ** model.range_falloff_exponent
        b[ok] = model.peak_prob * np.clip(falloff, 0.0, 1.0)
    return b


def detection_value(voxel_center, target_facing, camera, model):
    """Detection probability for one voxel center.

    ``target_facing`` is a unit vector for simulation-side evaluation or
    None when the facing is unknown (belief side), which skips the pose
    gate.
    """
    b = float(detection_values(np.asarray(voxel_center, dtype=np.float64)[None, :],
                               camera, model)[0])
    if b == 0.0 or target_facing is None:
        return b
    _, _, forward = camera_axes(camera.pan, camera.tilt)
    facing = np.asarray(target_facing, dtype=np.float64)
    facing = facing / np.linalg.norm(facing)
    cosang = float(np.clip(np.dot(facing, -forward), -1.0, 1.0))
    if math.acos(cosang) > model.max_pose_angle:
        return 0.0
    return b


@dataclass(frozen=True)
class RecognitionOutcome:
    detected: bool
    position_mm: tuple = None


def simulate_recognition(scene, camera, model, influence, rng):
    """One recognition attempt against the true scene.

    NotDetected when the voxel holding the target's center is outside
    the influence set; otherwise Detected with probability equal to the
    pose-gated detection value, using a single draw from ``rng``.
    """
    geometry = influence.geometry
    ijk = geometry.point_to_index(scene.target.center)
    if ijk is None:
        return RecognitionOutcome(False)
    flat = geometry.flat_index(ijk)
    hits = np.flatnonzero(influence.flat_indices == flat)
    if len(hits) == 0:
        return RecognitionOutcome(False)
    center = geometry.voxel_center(ijk)
    b_true = detection_value(center, scene.target.facing, camera, model)
    # Exactly one draw whenever the target voxel is observable, so the
    # random stream depends only on the action sequence.
    if rng.random() < b_true:
        return RecognitionOutcome(True, tuple(center))
    return RecognitionOutcome(False)
