"""Conspicuity lifting into voxels and the recognition-range gate."""

import numpy as np
import pytest

from avsearch.camera import CameraConfig, camera_axes
from avsearch.detection import DetectionModel
from avsearch.fusion import (VoxelWeights, conspicuous_to_voxels,
                             gate_beyond_recognition)
from avsearch.geometry import FREE, OBSTACLE, GridGeometry, OccupancyMap
from avsearch.render import RenderedView


def make_view(depth, cam=None):
    depth = np.asarray(depth, dtype=np.float64)
    if cam is None:
        cam = CameraConfig(position_mm=(0.0, 0.0, 0.0), pan=0.0, tilt=0.0,
                           fov_w=1.2, fov_h=1.0)
    h, w = depth.shape
    rgb = np.zeros((h, w, 3), np.uint8)
    return RenderedView(rgb=rgb, depth=depth, camera=cam)


def big_geometry():
    return GridGeometry((-4000.0, -4000.0, -4000.0), 250.0, (32, 32, 32))


def test_no_masked_pixels_gives_empty_weights():
    view = make_view(np.full((5, 5), 1000.0))
    out = conspicuous_to_voxels(np.ones((5, 5)), np.zeros((5, 5), bool),
                                view, big_geometry())
    assert len(out) == 0
    assert list(out.items()) == []


def test_zero_depth_pixels_skipped():
    depth = np.zeros((5, 5))
    view = make_view(depth)
    out = conspicuous_to_voxels(np.ones((5, 5)), np.ones((5, 5), bool),
                                view, big_geometry())
    assert len(out) == 0


def test_center_pixel_lands_in_forward_voxel():
    # With odd image dimensions the central pixel's ray is exactly the
    # camera's forward axis, so its point is position + depth * forward.
    cam = CameraConfig(position_mm=(120.0, -80.0, 40.0), pan=0.35,
                       tilt=-0.2, fov_w=1.2, fov_h=1.0)
    geo = big_geometry()
    d = 1234.0
    depth = np.zeros((5, 5))
    depth[2, 2] = d
    mask = np.zeros((5, 5), bool)
    mask[2, 2] = True
    out = conspicuous_to_voxels(np.full((5, 5), 0.8), mask, make_view(depth, cam),
                                geo)
    _, _, f = camera_axes(cam.pan, cam.tilt)
    want = geo.point_to_index(cam.position + d * f)
    assert len(out) == 1
    assert geo.unflatten(out.flat_indices[0]) == want
    np.testing.assert_allclose(out.values[0], 0.8)


def test_same_voxel_takes_max():
    # Two adjacent pixels at close range land in one voxel; the voxel
    # keeps the larger conspicuity, not the sum.
    # Mid-voxel camera height keeps both landing points inside one cell.
    cam = CameraConfig(position_mm=(0.0, 125.0, 125.0), pan=0.0, tilt=0.0,
                       fov_w=0.02, fov_h=0.02)  # narrow: rays nearly parallel
    geo = big_geometry()
    depth = np.full((1, 2), 520.0)
    consp = np.array([[0.3, 0.7]])
    out = conspicuous_to_voxels(consp, np.ones((1, 2), bool),
                                make_view(depth, cam), geo)
    assert len(out) == 1
    np.testing.assert_allclose(out.values[0], 0.7)


def test_points_outside_grid_dropped():
    view = make_view(np.full((3, 3), 50000.0))  # far beyond the grid
    out = conspicuous_to_voxels(np.ones((3, 3)), np.ones((3, 3), bool),
                                view, big_geometry())
    assert len(out) == 0


def test_occupancy_and_active_filters():
    cam = CameraConfig(position_mm=(0.0, 0.0, 0.0), pan=0.0, tilt=0.0,
                       fov_w=0.02, fov_h=0.02)
    geo = big_geometry()
    depth = np.full((1, 1), 500.0)
    mask = np.ones((1, 1), bool)
    view = make_view(depth, cam)
    hit = geo.flat_index(geo.point_to_index((500.0, 0.0, 0.0)))

    labels = np.full(geo.n_voxels, FREE, np.uint8)
    labels[hit] = OBSTACLE
    occ = OccupancyMap(geo, labels)
    out = conspicuous_to_voxels(np.ones((1, 1)), mask, view, geo,
                                occupancy=occ)
    assert len(out) == 0

    active = np.ones(geo.n_voxels, bool)
    active[hit] = False
    out = conspicuous_to_voxels(np.ones((1, 1)), mask, view, geo,
                                active_mask=active)
    assert len(out) == 0


def test_depth_noise_needs_rng_and_perturbs():
    view = make_view(np.full((3, 3), 800.0))
    consp = np.ones((3, 3))
    mask = np.ones((3, 3), bool)
    geo = big_geometry()
    with pytest.raises(ValueError):
        conspicuous_to_voxels(consp, mask, view, geo, depth_noise_mm=5.0)
    a = conspicuous_to_voxels(consp, mask, view, geo, depth_noise_mm=200.0,
                              rng=np.random.default_rng(1))
    b = conspicuous_to_voxels(consp, mask, view, geo, depth_noise_mm=200.0,
                              rng=np.random.default_rng(1))
    np.testing.assert_array_equal(a.flat_indices, b.flat_indices)


def test_shape_mismatch_raises():
    view = make_view(np.full((4, 4), 100.0))
    with pytest.raises(ValueError):
        conspicuous_to_voxels(np.ones((3, 3)), np.ones((4, 4), bool), view,
                              big_geometry())


def weights_at_distances(geo, cam_pos, distances):
    """VoxelWeights for voxels straight down +x at given distances."""
    flats = []
    for d in distances:
        flats.append(geo.flat_index(geo.point_to_index((cam_pos[0] + d,
                                                     cam_pos[1], cam_pos[2]))))
    return VoxelWeights(geometry=geo,
                        flat_indices=np.asarray(flats, np.int64),
                        values=np.linspace(0.2, 0.9, len(flats)))


def test_gate_drops_within_range_keeps_beyond():
    geo = big_geometry()
    cam = CameraConfig(position_mm=(0.0, 0.0, 0.0), pan=0.0, tilt=0.0,
                       fov_w=1.2, fov_h=1.0)
    model = DetectionModel(effective_range_mm=2000.0)
    # A voxel at half the recognition range is dropped.
    w = weights_at_distances(geo, cam.position_mm, [1000.0])
    assert len(gate_beyond_recognition(w, cam, model)) == 0
    # Everything beyond the range stays, values untouched.
    w = weights_at_distances(geo, cam.position_mm, [2600.0, 3400.0])
    out = gate_beyond_recognition(w, cam, model)
    np.testing.assert_array_equal(out.flat_indices, w.flat_indices)
    np.testing.assert_array_equal(out.values, w.values)
    # Mixed distances keep exactly the far subset.
    w = weights_at_distances(geo, cam.position_mm, [900.0, 2600.0, 1500.0,
                                                    3400.0])
    out = gate_beyond_recognition(w, cam, model)
    assert set(out.flat_indices) == set(w.flat_indices[[1, 3]])
    # Empty input passes through.
    empty = VoxelWeights(geometry=geo)
    assert len(gate_beyond_recognition(empty, cam, model)) == 0
