"""Greedy two-stage search controller.

At each position the planner enumerates a fixed pan/tilt action set,
executes the highest-utility action (expected detection mass per
second), and repeats, never re-running an executed action until the
next move.  When the best remaining action's covering probability falls
under ``theta_move`` the robot relocates to the lattice position whose
combined action set covers the most remaining probability mass.  The
search ends on detection, on an exhausted time budget, or once the
belief concludes the target is probably not in the region at all.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .attention import conspicuity_for_view
from .belief import (BoundaryMode, bayes_update, covering_probability,
                     grow_region, init_belief, inject_conspicuity)
from .camera import CameraConfig, Operation
from .detection import simulate_recognition
from .fusion import conspicuous_to_voxels, gate_beyond_recognition
from .geometry import FREE
from .render import render
from .visibility import (grid_centers, influence_for_cameras,
                         position_union_ids, segment_clear)

RECOGNIZER_ID = "box-recognizer"


@dataclass(frozen=True)
class PlannerConfig:
    theta_move: float = 0.05
    budget_k_s: float = 7200.0
    look_cost_s: float = 60.0
    move_speed_mm_s: float = 250.0
    pan_steps: int = 6
    tilt_values: tuple = (-math.pi / 12.0, math.pi / 12.0)
    move_lattice_mm: float = 500.0
    absent_threshold: float = 0.95
    attention_enabled: bool = False
    gain: float = 5.0
    fov_w: float = math.radians(60.0)
    fov_h: float = math.radians(40.0)
    max_range_mm: float = None  # None -> 2 * model.effective_range_mm
    view_width: int = 64
    view_height: int = 64

    def __post_init__(self):
        if not 0.0 < self.theta_move < 1.0:
            raise ValueError("theta_move must lie in (0, 1)")
        if self.budget_k_s <= 0:
            raise ValueError("budget_k_s must be positive")
        if self.pan_steps * len(self.tilt_values) < 1:
            raise ValueError("action set must not be empty")
        object.__setattr__(self, "tilt_values", tuple(self.tilt_values))

    def sensing_range(self, model):
        if self.max_range_mm is not None:
            return self.max_range_mm
        return 2.0 * model.effective_range_mm


class MoveSignal:
    """Sentinel decision: no remaining action is worth a look here."""

    def __repr__(self):
        return "MoveSignal()"


@dataclass
class Action:
    action_id: tuple
    operation: Operation
    influence: object
    covering: float
    utility: float


def action_set(position_mm, config, heading=0.0):
    """The pan x tilt camera poses at a position, in action-id order."""
    out = []
    for pi in range(config.pan_steps):
        pan = heading + 2.0 * math.pi * pi / config.pan_steps
        for ti, tilt in enumerate(config.tilt_values):
            cam = CameraConfig(position_mm=tuple(position_mm), pan=pan, tilt=tilt,
                               fov_w=config.fov_w, fov_h=config.fov_h)
            out.append(((pi, ti), cam))
    return out


def action_influences(position_mm, config, geometry, occupancy, model,
                      active_mask=None, heading=0.0):
    """Influence sets of the full action set at a position."""
    actions = action_set(position_mm, config, heading)
    cams = [cam for _, cam in actions]
    infs = influence_for_cameras(geometry, occupancy, active_mask, cams, model,
                                 config.sensing_range(model))
    return {aid: (cam, inf) for (aid, cam), inf in zip(actions, infs)}


def action_utility(belief, influence, cost_s):
    """Expected detection mass per second: (sum of mass * b) / cost."""
    if cost_s <= 0:
        raise ValueError("cost_s must be positive")
    if len(influence) == 0:
        return 0.0
    return float(np.dot(belief.mass[influence.flat_indices], influence.b)) / cost_s


def where_to_look_next(belief, camera_position, config, geometry, occupancy,
                       model, already_executed, active_mask=None, heading=0.0,
                       influences=None):
    """Best remaining action at this position, or MoveSignal.

    MoveSignal fires when no remaining action's covering probability
    reaches ``theta_move`` (or no action remains).  Among the rest the
    highest utility wins; exact ties go to the smallest (pan index,
    tilt index).
    """
    if influences is None:
        influences = action_influences(camera_position, config, geometry,
                                       occupancy, model, active_mask, heading)
    best = None
    best_covering = -1.0
    for aid in sorted(influences):
        if aid in already_executed:
            continue
        cam, inf = influences[aid]
        covering = covering_probability(belief, inf.flat_indices)
        utility = action_utility(belief, inf, config.look_cost_s)
        best_covering = max(best_covering, covering)
        if best is None or utility > best.utility:
            op = Operation(camera=cam, recognizer_id=RECOGNIZER_ID,
                           cost_s=config.look_cost_s)
            best = Action(action_id=aid, operation=op, influence=inf,
                          covering=covering, utility=utility)
    if best is None or best_covering < config.theta_move:
        return MoveSignal()
    return best


def move_candidates(current_position, config, geometry, occupancy):
    """Reachable lattice positions at the robot's height.

    Lattice points sit at half-spacing offsets from the grid origin.
    A candidate must lie in a Free voxel, be reachable along an
    obstacle-free straight segment, and differ from the current
    position.
    """
    ox, oy, _ = geometry.origin_mm
    ex, ey, _ = geometry.extent_mm
    s = config.move_lattice_mm
    z = float(current_position[2])
    out = []
    cur = np.asarray(current_position, dtype=np.float64)
    nx_pts = int(math.floor((ex - s / 2.0) / s)) + 1
    ny_pts = int(math.floor((ey - s / 2.0) / s)) + 1
    for i in range(nx_pts):
        for j in range(ny_pts):
            p = (ox + s / 2.0 + i * s, oy + s / 2.0 + j * s, z)
            ijk = geometry.point_to_index(p)
            if ijk is None or occupancy.label_at(ijk) != FREE:
                continue
            if float(np.linalg.norm(np.asarray(p) - cur)) < 1e-9:
                continue
            if not segment_clear(occupancy, cur, p):
                continue
            out.append(p)
    return out


def position_union_covering(belief, position_mm, config, geometry, occupancy,
                            model, active_mask=None, heading=0.0,
                            union_cache=None):
    """Covering probability of the union of a position's influence sets."""
    key = tuple(position_mm)
    ids = None if union_cache is None else union_cache.get(key)
    if ids is None:
        cams = [cam for _, cam in action_set(position_mm, config, heading)]
        ids = position_union_ids(geometry, occupancy, active_mask, position_mm,
                                 cams, config.sensing_range(model))
        if union_cache is not None:
            union_cache[key] = ids
    return covering_probability(belief, ids)


def where_to_move_next(belief, current_position, config, geometry, occupancy,
                       model, active_mask=None, heading=0.0, union_cache=None):
    """Lattice position whose action set covers the most remaining mass.

    Ties break to the candidate nearest the current position, then
    lexicographically by coordinates.  Candidates are visited in order
    of an upper bound (in-range mass inside the reachable elevation
    band); once the bound falls under the best exact score, the rest
    cannot win and are skipped.  ``union_cache`` (a dict) carries each
    position's influence-union voxel ids across calls; entries stay
    valid as long as geometry and occupancy do.
    """
    cands = move_candidates(current_position, config, geometry, occupancy)
    if not cands:
        raise ValueError("robot boxed in")
    centers = grid_centers(geometry)
    mass = belief.mass
    rng_mm = config.sensing_range(model)
    cur = np.asarray(current_position, dtype=np.float64)
    # Elevation of any frustum point is at most |tilt| + fov_h/2.
    el_max = max(abs(t) for t in config.tilt_values) + config.fov_h / 2.0
    sin_band = 1.0 if el_max >= math.pi / 2.0 else math.sin(el_max) * (1.0 + 1e-12)

    def upper_bound(p):
        delta = centers - np.asarray(p)
        d2 = (delta ** 2).sum(axis=1)
        near = d2 <= rng_mm * rng_mm
        band = delta[:, 2] ** 2 <= (sin_band * sin_band) * d2
        return float(mass[near & band].sum())

    bounds = {p: upper_bound(p) for p in cands}
    order = sorted(cands, key=bounds.__getitem__, reverse=True)
    best = None
    for p in order:
        if best is not None and bounds[p] < best[0] - 1e-12:
            break
        score = position_union_covering(belief, p, config, geometry, occupancy,
                                        model, active_mask, heading,
                                        union_cache=union_cache)
        key = (score, -float(np.linalg.norm(np.asarray(p) - cur)),
               tuple(-c for c in p))
        if best is None or key > best[1]:
            best = (score, key, p)
    return best[2]


@dataclass
class LookRecord:
    kind: str
    action_id: tuple
    camera: CameraConfig
    covering: float
    detected: bool
    t_after_s: float


@dataclass
class MoveRecord:
    kind: str
    from_mm: tuple
    to_mm: tuple
    distance_mm: float
    t_after_s: float


@dataclass
class SearchLog:
    records: list = field(default_factory=list)
    result: str = ""
    found_position_mm: tuple = None
    actions: int = 0
    moves: int = 0
    sim_time_s: float = 0.0
    distance_m: float = 0.0
    renders: int = 0
    attention_updates: int = 0
    final_out_mass: float = 0.0


def run_search(scene, geometry, occupancy, model, config, mode, rng_seed,
               start_position_mm, heading=0.0, attention=None,
               out_mass_init=None, sphere_radius_mm=4000.0):
    """Execute one full search; returns the SearchLog.

    Deterministic for a fixed seed: the generator is consumed only by
    recognition draws.  One detail beyond the bare loop: immediately
    after arriving somewhere (including the start) the robot always
    looks at least once before the move threshold may fire again, which
    rules out endless relocation without sensing.
    """
    if config.attention_enabled and attention is None:
        raise ValueError("attention_enabled requires an attention context")
    if out_mass_init is None:
        out_mass_init = 0.5 if mode == BoundaryMode.GROWING else 0.1
    rng = np.random.default_rng(rng_seed)
    belief = init_belief(geometry, occupancy, mode, out_mass_init,
                         start_position_mm=start_position_mm,
                         sphere_radius_mm=sphere_radius_mm)
    log = SearchLog()
    position = tuple(float(v) for v in start_position_mm)
    executed = set()
    looks_here = 0
    t = 0.0
    active = belief.active if mode == BoundaryMode.GROWING else None
    move_cache = {}
    influences = action_influences(position, config, geometry, occupancy,
                                   model, active, heading)

    while True:
        decision = where_to_look_next(belief, position, config, geometry,
                                      occupancy, model, executed,
                                      active_mask=active, heading=heading,
                                      influences=influences)
        if isinstance(decision, MoveSignal) and looks_here == 0 \
                and len(executed) < len(influences):
            # Forced first look after arrival: take the utility argmax
            # even though every covering is under the threshold.
            relaxed = replace(config, theta_move=1e-300)
            decision = where_to_look_next(belief, position, relaxed, geometry,
                                          occupancy, model, executed,
                                          active_mask=active, heading=heading,
                                          influences=influences)
        if isinstance(decision, MoveSignal):
            target_pos = where_to_move_next(belief, position, config, geometry,
                                            occupancy, model,
                                            active_mask=active, heading=heading,
                                            union_cache=move_cache)
            dist = float(np.linalg.norm(np.asarray(target_pos) - np.asarray(position)))
            t += dist / config.move_speed_mm_s
            log.records.append(MoveRecord(kind="move", from_mm=position,
                                          to_mm=tuple(target_pos),
                                          distance_mm=dist, t_after_s=t))
            log.moves += 1
            log.distance_m += dist / 1000.0
            position = tuple(target_pos)
            executed = set()
            looks_here = 0
            if mode == BoundaryMode.GROWING:
                belief, occupancy = grow_region(belief, occupancy, position, mode)
                active = belief.active
                move_cache.clear()  # the active set changed
            influences = action_influences(position, config, geometry,
                                           occupancy, model, active, heading)
            if t > config.budget_k_s:
                log.result = "BudgetExhausted"
                break
            continue

        op = decision.operation
        t += op.cost_s
        outcome = simulate_recognition(scene, op.camera, model,
                                       decision.influence, rng)
        log.records.append(LookRecord(kind="look", action_id=decision.action_id,
                                      camera=op.camera, covering=decision.covering,
                                      detected=outcome.detected, t_after_s=t))
        log.actions += 1
        executed.add(decision.action_id)
        looks_here += 1
        if outcome.detected:
            log.result = "Found"
            log.found_position_mm = outcome.position_mm
            break

        belief = bayes_update(belief, decision.influence)
        if config.attention_enabled:
            view = render(scene, op.camera, config.view_width, config.view_height)
            log.renders += 1
            # A view with no depth hits cannot fuse any pixel into a
            # voxel, so the conspicuity pass would be a no-op.
            if float(view.depth.max()) > 0.0:
                consp, mask = conspicuity_for_view(view, attention)
                weights = conspicuous_to_voxels(consp, mask, view, geometry,
                                                occupancy=occupancy,
                                                active_mask=belief.active)
                weights = gate_beyond_recognition(weights, op.camera, model)
                belief = inject_conspicuity(belief, weights, config.gain)
                log.attention_updates += 1
        if belief.out_mass > config.absent_threshold:
            log.result = "DeclaredAbsent"
            break
        if t > config.budget_k_s:
            log.result = "BudgetExhausted"
            break

    log.sim_time_s = t
    log.final_out_mass = belief.out_mass
    return log
