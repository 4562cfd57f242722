"""Grid indexing, voxel centers, and scene voxelization."""

import numpy as np
import pytest

from avsearch.geometry import (FREE, OBSTACLE, OUTSIDE, GridGeometry,
                               OccupancyMap)
from avsearch.scene import Box, Scene, TargetBox, scene_occupancy


def test_flat_index_round_trip():
    geo = GridGeometry((0, 0, 0), 50.0, (4, 5, 6))
    rng = np.random.default_rng(0)
    for _ in range(100):
        ijk = tuple(int(rng.integers(0, d)) for d in geo.dims)
        assert geo.unflatten(geo.flat_index(ijk)) == ijk


def test_flat_order_matches_centers():
    # Flat id (i*ny + j)*nz + k must match the order centers() emits.
    geo = GridGeometry((100.0, -50.0, 0.0), 25.0, (3, 4, 2))
    centers = geo.centers()
    for flat in range(geo.n_voxels):
        ijk = geo.unflatten(flat)
        np.testing.assert_allclose(centers[flat], geo.voxel_center(ijk))


def test_point_to_index_boundaries():
    geo = GridGeometry((0, 0, 0), 100.0, (2, 2, 2))
    assert geo.point_to_index((0.0, 0.0, 0.0)) == (0, 0, 0)
    assert geo.point_to_index((199.9, 199.9, 199.9)) == (1, 1, 1)
    assert geo.point_to_index((-0.1, 50.0, 50.0)) is None
    assert geo.point_to_index((200.0, 50.0, 50.0)) is None
    assert geo.contains_point((150.0, 150.0, 150.0))


def test_geometry_validation():
    with pytest.raises(ValueError):
        GridGeometry((0, 0, 0), 0.0, (2, 2, 2))
    with pytest.raises(ValueError):
        GridGeometry((0, 0, 0), 10.0, (2, 0, 2))


def test_occupancy_shapes_and_labels():
    geo = GridGeometry((0, 0, 0), 100.0, (2, 3, 4))
    grid = np.zeros((2, 3, 4), np.uint8)
    grid[1, 2, 3] = OBSTACLE
    occ = OccupancyMap(geo, grid)
    assert occ.label_at((1, 2, 3)) == OBSTACLE
    assert occ.label_at((0, 0, 0)) == FREE
    with pytest.raises(ValueError):
        OccupancyMap(geo, np.zeros(5, np.uint8))
    with pytest.raises(ValueError):
        OccupancyMap(geo, np.full(geo.n_voxels, 9, np.uint8))


def test_scene_occupancy_marks_obstacles_not_distractors():
    target = TargetBox.centered((1500.0, 1500.0, 500.0), (200.0,) * 3,
                                color=(200, 40, 40))
    obstacle = Box((400.0, 400.0, 0.0), (800.0, 800.0, 900.0))
    distractor = Box((2200.0, 2200.0, 400.0), (2400.0, 2400.0, 600.0),
                     color=(10, 200, 10))
    scene = Scene(room_extent_mm=(3000.0, 3000.0, 1500.0), target=target,
                  obstacles=(obstacle,), distractors=(distractor,))
    geo, occ = scene_occupancy(scene, 100.0)
    assert occ.label_at(geo.point_to_index((600.0, 600.0, 450.0))) == OBSTACLE
    # Distractors are camera-visible clutter only; they occupy nothing.
    assert occ.label_at(geo.point_to_index((2300.0, 2300.0, 500.0))) == FREE
    assert occ.label_at(geo.point_to_index(target.center)) == FREE
    labels3d = occ.labels.reshape(geo.dims)
    want = np.zeros(geo.dims, bool)
    centers = geo.centers().reshape(geo.dims + (3,))
    inside = obstacle.contains_points(centers.reshape(-1, 3)).reshape(geo.dims)
    np.testing.assert_array_equal(labels3d == OBSTACLE, inside | want)


def test_voxel_center_known_value():
    geo = GridGeometry((1000.0, 2000.0, 0.0), 200.0, (4, 4, 4))
    np.testing.assert_allclose(geo.voxel_center((0, 0, 0)),
                               [1100.0, 2100.0, 100.0])
    np.testing.assert_allclose(geo.voxel_center((3, 2, 1)),
                               [1700.0, 2500.0, 300.0])
