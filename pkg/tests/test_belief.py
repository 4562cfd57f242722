"""Belief state: priors, the miss update, coverings, boosts, growth."""

import numpy as np
import pytest

from avsearch.belief import (BeliefState, BoundaryMode, bayes_update,
                             covering_probability, covering_probability_ijk,
                             grow_region, init_belief, inject_conspicuity)
from avsearch.geometry import FREE, OBSTACLE, GridGeometry, OccupancyMap


def make_grid(dims=(4, 5, 5), edge=100.0, labels=None):
    geo = GridGeometry(origin_mm=(0.0, 0.0, 0.0), voxel_edge_mm=edge, dims=dims)
    occ = OccupancyMap.all_free(geo) if labels is None else OccupancyMap(geo, labels)
    return geo, occ


def brute_posterior(mass, out, idx, b):
    """Reference miss update computed with plain Python loops."""
    post = [float(m) for m in mass]
    for i, bi in zip(idx, b):
        post[i] *= 1.0 - bi
    d = out + sum(post)
    return [p / d for p in post], out / d


def test_init_known_uniform():
    geo, occ = make_grid((2, 2, 1))
    belief = init_belief(geo, occ, BoundaryMode.KNOWN, 0.2)
    np.testing.assert_allclose(belief.mass, 0.2)
    assert belief.out_mass == 0.2
    belief.check_normalized()


def test_init_single_voxel_no_out_mass():
    geo, occ = make_grid((1, 1, 1))
    belief = init_belief(geo, occ, BoundaryMode.KNOWN, 0.0)
    np.testing.assert_allclose(belief.mass, [1.0])
    assert belief.out_mass == 0.0


def test_init_growing_sphere_membership():
    # 100 free voxels; a radius-150 sphere around a corner point reaches
    # exactly the voxels the brute-force distance test says it does.
    geo, occ = make_grid((4, 5, 5), edge=100.0)
    start = (50.0, 50.0, 50.0)
    belief = init_belief(geo, occ, BoundaryMode.GROWING, 0.1,
                         start_position_mm=start, sphere_radius_mm=150.0)
    centers = geo.centers()
    inside = np.linalg.norm(centers - np.asarray(start), axis=1) <= 150.0
    assert inside.sum() > 0
    np.testing.assert_array_equal(belief.active, inside)
    np.testing.assert_allclose(belief.mass[inside], 0.9 / inside.sum())
    np.testing.assert_allclose(belief.mass[~inside], 0.0)
    assert belief.out_mass == 0.1


def test_init_growing_ten_of_hundred():
    geo, occ = make_grid((10, 10, 1), edge=100.0)
    centers = geo.centers()
    # Off-center start so the ten nearest voxels are strictly nearest.
    start = (463.0, 522.0, 50.0)
    d = np.sort(np.linalg.norm(centers - np.asarray(start), axis=1))
    assert d[9] < d[10]
    radius = (d[9] + d[10]) / 2.0
    belief = init_belief(geo, occ, BoundaryMode.GROWING, 0.1,
                         start_position_mm=start, sphere_radius_mm=radius)
    assert int(belief.active.sum()) == 10
    np.testing.assert_allclose(belief.mass[belief.active], 0.09)
    np.testing.assert_allclose(belief.out_mass, 0.1)


def test_init_rejects_bad_out_mass():
    geo, occ = make_grid((2, 2, 1))
    with pytest.raises(ValueError):
        init_belief(geo, occ, BoundaryMode.KNOWN, 1.0)
    with pytest.raises(ValueError):
        init_belief(geo, occ, BoundaryMode.KNOWN, -0.1)


def test_bayes_hand_case():
    # cells (0.4, 0.4), out 0.2, observed b = (1, 0).
    belief = BeliefState(mass=np.array([0.4, 0.4]), out_mass=0.2,
                         active=np.ones(2, bool), prior_density=0.4)
    post = bayes_update(belief, (np.array([0, 1]), np.array([1.0, 0.0])))
    np.testing.assert_allclose(post.mass, [0.0, 2.0 / 3.0], atol=1e-15)
    np.testing.assert_allclose(post.out_mass, 1.0 / 3.0, atol=1e-15)
    assert post.epoch == 1


def test_bayes_all_zero_b_is_identity():
    belief = BeliefState(mass=np.array([0.3, 0.5]), out_mass=0.2,
                         active=np.ones(2, bool), prior_density=0.3)
    post = bayes_update(belief, (np.array([0, 1]), np.zeros(2)))
    np.testing.assert_allclose(post.mass, belief.mass)
    assert post.out_mass == belief.out_mass


def test_bayes_uniform_b_keeps_uniform():
    n = 7
    belief = BeliefState(mass=np.full(n, 1.0 / n), out_mass=0.0,
                         active=np.ones(n, bool), prior_density=1.0 / n)
    post = bayes_update(belief, (np.arange(n), np.full(n, 0.4)))
    np.testing.assert_allclose(post.mass, 1.0 / n)


def test_bayes_matches_bruteforce_oracle():
    rng = np.random.default_rng(42)
    for _ in range(300):
        n = int(rng.integers(1, 51))
        raw = rng.random(n + 1)
        raw /= raw.sum()
        mass, out = raw[:n], float(raw[n])
        k = int(rng.integers(0, n + 1))
        idx = rng.choice(n, size=k, replace=False)
        b = rng.random(k)
        belief = BeliefState(mass=mass.copy(), out_mass=out,
                             active=np.ones(n, bool), prior_density=1.0 / n)
        post = bayes_update(belief, (idx, b))
        want_mass, want_out = brute_posterior(mass, out, idx, b)
        np.testing.assert_allclose(post.mass, want_mass, atol=1e-12, rtol=0)
        np.testing.assert_allclose(post.out_mass, want_out, atol=1e-12, rtol=0)
        assert abs(post.total() - 1.0) < 1e-9


def test_covering_probability_cases():
    belief = BeliefState(mass=np.array([0.25, 0.35, 0.4]), out_mass=0.0,
                         active=np.ones(3, bool), prior_density=0.25)
    assert covering_probability(belief, np.array([], dtype=np.int64)) == 0.0
    np.testing.assert_allclose(covering_probability(belief, np.arange(3)), 1.0)
    np.testing.assert_allclose(covering_probability(belief, np.array([0])), 0.25)


def test_covering_probability_ijk():
    geo, occ = make_grid((2, 2, 2))
    belief = init_belief(geo, occ, BoundaryMode.KNOWN, 0.0)
    got = covering_probability_ijk(belief, geo, [(0, 0, 0), (1, 1, 1)])
    np.testing.assert_allclose(got, 2.0 / 8.0)


def test_inject_hand_case():
    belief = BeliefState(mass=np.array([0.5, 0.5]), out_mass=0.0,
                         active=np.ones(2, bool), prior_density=0.5)
    boosted = inject_conspicuity(belief, (np.array([0]), np.array([1.0])), 1.0)
    np.testing.assert_allclose(boosted.mass, [2.0 / 3.0, 1.0 / 3.0])


def test_inject_identity_cases():
    belief = BeliefState(mass=np.array([0.6, 0.4]), out_mass=0.0,
                         active=np.ones(2, bool), prior_density=0.5)
    for weights, gain in [((np.array([], int), np.array([])), 2.0),
                          ((np.array([0]), np.array([0.7])), 0.0)]:
        same = inject_conspicuity(belief, weights, gain)
        np.testing.assert_allclose(same.mass, belief.mass)
    with pytest.raises(ValueError):
        inject_conspicuity(belief, (np.array([0]), np.array([1.0])), -1.0)


def test_inject_accepts_dict_and_keeps_zeros():
    belief = BeliefState(mass=np.array([0.0, 0.5, 0.5]), out_mass=0.0,
                         active=np.ones(3, bool), prior_density=0.5)
    boosted = inject_conspicuity(belief, {0: 1.0, 2: 1.0}, 3.0)
    assert boosted.mass[0] == 0.0
    np.testing.assert_allclose(boosted.total(), 1.0)


def test_grow_region_hand_case():
    # Sphere reveals 5 new voxels at prior density 0.01, out_mass 0.3.
    geo, occ = make_grid((7, 1, 1), edge=100.0)
    active = np.zeros(7, bool)
    active[:2] = True
    mass = np.zeros(7)
    mass[:2] = 0.35
    belief = BeliefState(mass=mass, out_mass=0.3, active=active,
                         prior_density=0.01, sphere_radius_mm=1e6)
    grown, _ = grow_region(belief, occ, (350.0, 50.0, 50.0),
                           BoundaryMode.GROWING)
    assert int(grown.active.sum()) == 7
    np.testing.assert_allclose(grown.out_mass, 0.25)
    np.testing.assert_allclose(grown.mass[2:], 0.01)
    grown.check_normalized()


def test_grow_region_same_position_is_identity():
    geo, occ = make_grid((3, 3, 1))
    start = (150.0, 150.0, 50.0)
    belief = init_belief(geo, occ, BoundaryMode.GROWING, 0.5,
                         start_position_mm=start, sphere_radius_mm=1e6)
    grown, _ = grow_region(belief, occ, start, BoundaryMode.GROWING)
    np.testing.assert_array_equal(grown.active, belief.active)
    np.testing.assert_allclose(grown.mass, belief.mass)


def test_grow_region_skips_obstacles_and_hidden_voxels():
    # Row of voxels with an obstacle in the middle: voxels behind it
    # are revealed by a sphere but fail the line-of-sight test.
    labels = np.zeros((5, 1, 1), np.uint8)
    labels[2, 0, 0] = OBSTACLE
    geo, occ = make_grid((5, 1, 1), labels=labels)
    active = np.zeros(5, bool)
    active[0] = True
    mass = np.zeros(5)
    mass[0] = 0.5
    belief = BeliefState(mass=mass, out_mass=0.5, active=active,
                         prior_density=0.1, sphere_radius_mm=1e6)
    grown, _ = grow_region(belief, occ, (50.0, 50.0, 50.0),
                           BoundaryMode.GROWING)
    assert bool(grown.active[geo.flat_index((1, 0, 0))])
    assert not bool(grown.active[geo.flat_index((2, 0, 0))])
    assert not bool(grown.active[geo.flat_index((3, 0, 0))])
    assert not bool(grown.active[geo.flat_index((4, 0, 0))])


def test_grow_region_requires_growing_mode():
    geo, occ = make_grid((2, 1, 1))
    belief = init_belief(geo, occ, BoundaryMode.KNOWN, 0.1)
    with pytest.raises(ValueError):
        grow_region(belief, occ, (50.0, 50.0, 50.0), BoundaryMode.KNOWN)


def test_normalization_invariant_over_random_pipelines():
    # Chains of update / inject / grow keep the belief normalized.
    rng = np.random.default_rng(7)
    geo, occ = make_grid((6, 6, 3))
    for _ in range(20):
        belief = init_belief(geo, occ, BoundaryMode.GROWING,
                             float(rng.uniform(0.0, 0.9)),
                             start_position_mm=(300.0, 300.0, 150.0),
                             sphere_radius_mm=float(rng.uniform(150.0, 500.0)))
        for _ in range(10):
            op = rng.integers(0, 3)
            if op == 0:
                k = int(rng.integers(1, 20))
                idx = rng.choice(geo.n_voxels, size=k, replace=False)
                belief = bayes_update(belief, (idx, rng.random(k)))
            elif op == 1:
                k = int(rng.integers(1, 10))
                idx = rng.choice(geo.n_voxels, size=k, replace=False)
                belief = inject_conspicuity(belief, (idx, rng.random(k)),
                                            float(rng.uniform(0.0, 10.0)))
            else:
                p = (float(rng.uniform(0.0, 600.0)),
                     float(rng.uniform(0.0, 600.0)), 150.0)
                belief, _ = grow_region(belief, occ, p, BoundaryMode.GROWING)
            belief.check_normalized()
