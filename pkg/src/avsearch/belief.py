"""Probabilistic belief over voxelized target location.

The belief assigns probability mass to every active Free voxel plus one
scalar ``out_mass`` for "the target is not in the searched region".
All operations are pure: they return new BeliefState snapshots and
maintain ``sum(mass) + out_mass == 1`` within 1e-9.

In Known-boundary mode the whole Free space is active from the start.
In Growing mode only the viewing sphere around the robot is active;
moving grows the region as the union of viewing spheres, transferring a
fixed per-voxel prior density out of ``out_mass`` for each voxel the
new sphere reveals.
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from . import engine
from .geometry import FREE


class BoundaryMode(enum.Enum):
    KNOWN = "known"
    GROWING = "growing"


@dataclass
class BeliefState:
    """Snapshot of the target-location belief.

    mass: per-voxel probability, flat C-order, zeros on inactive voxels.
    out_mass: probability that the target is outside the active region.
    active: per-voxel search-region membership, flat bools.
    prior_density: per-voxel mass assigned at init (used by region growth).
    epoch: number of Bayes updates applied so far.
    """

    mass: np.ndarray
    out_mass: float
    active: np.ndarray
    prior_density: float
    epoch: int = 0
    sphere_radius_mm: float = field(default=4000.0)

    def total(self):
        return float(self.mass.sum()) + self.out_mass

    def check_normalized(self, tol=1e-9):
        if abs(self.total() - 1.0) >= tol:
            raise AssertionError("belief not normalized: total=%r" % self.total())


def init_belief(geometry, occupancy, mode, out_mass_init,
                start_position_mm=None, sphere_radius_mm=4000.0):
    """Uniform prior over the active Free voxels.

    Known mode activates every Free voxel.  Growing mode activates only
    Free voxels whose centers lie within ``sphere_radius_mm`` of
    ``start_position_mm`` (required in that mode).
    """
    if not 0.0 <= out_mass_init < 1.0:
        raise ValueError("out_mass_init must be in [0, 1)")
    free = occupancy.labels == FREE
    if mode == BoundaryMode.KNOWN:
        active = free.copy()
    elif mode == BoundaryMode.GROWING:
        if start_position_mm is None:
            raise ValueError("Growing mode needs start_position_mm")
        centers = geometry.centers()
        d = np.linalg.norm(centers - np.asarray(start_position_mm, dtype=np.float64), axis=1)
        active = free & (d <= sphere_radius_mm)
    else:
        raise ValueError("unknown boundary mode %r" % (mode,))
    n = int(active.sum())
    if n == 0:
        raise ValueError("empty search region")
    density = (1.0 - out_mass_init) / n
    mass = np.zeros(geometry.n_voxels, dtype=np.float64)
    mass[active] = density
    return BeliefState(mass=mass, out_mass=float(out_mass_init), active=active,
                       prior_density=density, epoch=0, sphere_radius_mm=sphere_radius_mm)


def _observed_arrays(observed):
    """Accept an InfluenceSet or parallel (flat_indices, b) arrays."""
    if hasattr(observed, "flat_indices"):
        return observed.flat_indices, observed.b
    idx, b = observed
    return np.asarray(idx, dtype=np.int64), np.asarray(b, dtype=np.float64)


def bayes_update(belief, observed):
    """Posterior after a failed detection attempt.

    Every observed voxel i with detection probability b_i keeps mass
    p_i * (1 - b_i) / D, everything else (out_mass included) is divided
    by the same D = out_mass + sum_j p_j (1 - b_j).
    """
    idx, b = _observed_arrays(observed)
    mass = belief.mass.copy()
    removed = float(np.dot(mass[idx], b)) if len(idx) else 0.0
    d = belief.out_mass + (float(mass.sum()) - removed)
    if d <= 0.0:
        raise ValueError("degenerate posterior")
    if len(idx):
        mass[idx] *= 1.0 - b
    mass /= d
    return BeliefState(mass=mass, out_mass=belief.out_mass / d, active=belief.active.copy(),
                       prior_density=belief.prior_density, epoch=belief.epoch + 1,
                       sphere_radius_mm=belief.sphere_radius_mm)


def covering_probability(belief, voxels):
    """Probability the target sits in any of the given voxels (Prob_Psi).

    ``voxels`` may be an iterable of (i, j, k) triples or a flat-id array.
    """
    if isinstance(voxels, np.ndarray):
        flat = voxels
    else:
        voxels = list(voxels)
        if not voxels:
            return 0.0
        if not np.isscalar(voxels[0]):
            raise TypeError("index triples need covering_probability_ijk")
        flat = np.asarray(voxels, dtype=np.int64)
    if len(flat) == 0:
        return 0.0
    return float(belief.mass[flat].sum())


def covering_probability_ijk(belief, geometry, voxels):
    """covering_probability for an iterable of (i, j, k) index triples."""
    flat = np.asarray([geometry.flat_index(v) for v in voxels], dtype=np.int64)
    return covering_probability(belief, flat)


def inject_conspicuity(belief, weights, gain):
    """Boost voxel masses multiplicatively by their conspicuity.

    mass'_v = mass_v * (1 + gain * w_v) on weighted voxels, then global
    renormalization including out_mass.  Zero-mass voxels stay zero.
    """
    if gain < 0:
        raise ValueError("gain must be non-negative")
    if hasattr(weights, "flat_indices"):
        idx, w = weights.flat_indices, weights.values
    elif isinstance(weights, dict):
        idx = np.fromiter(weights.keys(), dtype=np.int64, count=len(weights))
        w = np.fromiter(weights.values(), dtype=np.float64, count=len(weights))
    else:
        idx, w = weights
        idx = np.asarray(idx, dtype=np.int64)
        w = np.asarray(w, dtype=np.float64)
    mass = belief.mass.copy()
    if len(idx) and gain > 0:
        mass[idx] *= 1.0 + gain * w
        z = float(mass.sum()) + belief.out_mass
        mass /= z
        out = belief.out_mass / z
    else:
        out = belief.out_mass
    return BeliefState(mass=mass, out_mass=out, active=belief.active.copy(),
                       prior_density=belief.prior_density, epoch=belief.epoch,
                       sphere_radius_mm=belief.sphere_radius_mm)


def grow_region(belief, occupancy, new_position_mm, mode):
    """Extend the active region with the viewing sphere at a new position.

    Newly revealed voxels are Free, within the viewing sphere radius,
    and not hidden behind an obstacle (the straight segment from
    ``new_position_mm`` to the voxel center crosses no Obstacle voxel).
    Each one receives the prior density recorded at init, paid out of
    ``out_mass`` (clamped at zero).  Returns the new belief and the
    unchanged occupancy.
    """
    if mode != BoundaryMode.GROWING:
        raise ValueError("grow_region requires Growing mode")
    geometry = occupancy.geometry
    pos = np.asarray(new_position_mm, dtype=np.float64)
    centers = geometry.centers()
    d = np.linalg.norm(centers - pos, axis=1)
    candidate = (occupancy.labels == FREE) & (d <= belief.sphere_radius_mm) & ~belief.active
    cand_idx = np.flatnonzero(candidate)
    if len(cand_idx):
        k = engine.kernels()
        nx, ny, nz = geometry.dims
        ox, oy, oz = geometry.origin_mm
        vis = k.visible_from(occupancy.labels, nx, ny, nz, ox, oy, oz,
                             geometry.voxel_edge_mm, pos[0], pos[1], pos[2],
                             centers[cand_idx, 0].copy(), centers[cand_idx, 1].copy(),
                             centers[cand_idx, 2].copy())
        cand_idx = cand_idx[vis]
    if len(cand_idx) == 0:
        return belief, occupancy
    transfer_total = min(belief.prior_density * len(cand_idx), belief.out_mass)
    share = transfer_total / len(cand_idx)
    mass = belief.mass.copy()
    mass[cand_idx] = share
    active = belief.active.copy()
    active[cand_idx] = True
    out = belief.out_mass - transfer_total
    total = float(mass.sum()) + out
    mass /= total
    out /= total
    grown = BeliefState(mass=mass, out_mass=out, active=active,
                        prior_density=belief.prior_density, epoch=belief.epoch,
                        sphere_radius_mm=belief.sphere_radius_mm)
    return grown, occupancy
