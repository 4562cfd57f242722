"""Attentive active visual search in a voxelized scene.

The package simulates a camera-equipped robot searching a room for a
known object.  A probabilistic belief over a voxel grid tracks where the
target may still be, a greedy planner picks camera actions and movement
targets, and an optional attention stage (bottom-up saliency fused with
color backprojection) redistributes belief mass toward conspicuous
regions after every failed detection.
"""

from .geometry import GridGeometry, OccupancyMap, FREE, OBSTACLE, OUTSIDE
from .belief import BeliefState, init_belief, bayes_update, covering_probability
from .camera import CameraConfig, camera_axes, in_frustum
from .detection import DetectionModel, detection_value

__version__ = "0.1.0"

__all__ = [
    "GridGeometry",
    "OccupancyMap",
    "FREE",
    "OBSTACLE",
    "OUTSIDE",
    "BeliefState",
    "init_belief",
    "bayes_update",
    "covering_probability",
    "CameraConfig",
    "camera_axes",
    "in_frustum",
    "DetectionModel",
    "detection_value",
    "__version__",
]
