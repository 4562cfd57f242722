"""Scenario files and the random scenario generator.

A scenario pins down everything one search run needs: the room, the
robot start pose, the target box, obstacle and distractor boxes, the
detection model, the planner configuration, attention parameters, and
the search bookkeeping (boundary mode, seed, prior masses).  The file
format is line-oriented text: bracketed section headers, `key = value`
lines, `#` comments.  [obstacle] and [distractor] sections may repeat;
every other section appears at most once, and omitted keys take the
defaults documented on ScenarioSpec.  Unknown sections or keys are
rejected with the offending line number.

The generator places robot, target, obstacles and distractors at
random under a profile ("near": target within recognition range of the
start with a clear line of sight, "far": beyond it, "mixed": either),
rejection-sampling until the placement invariants hold, so a generated
scenario is always solvable.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .belief import BoundaryMode
from .detection import DetectionModel
from .planner import PlannerConfig
from .scene import Box, Scene, TargetBox, scene_occupancy
from .visibility import segment_clear


class ScenarioError(ValueError):
    """A scenario file or spec that violates the documented contract."""


@dataclass(frozen=True)
class ScenarioSpec:
    """One fully-specified search problem.

    ``boundaries`` is "known" (search the whole room) or "unknown"
    (search a growing region seeded by a viewing sphere at the start).
    ``seed`` feeds the recognition draws; the same spec and seed always
    reproduce the same run.
    """

    target: TargetBox
    scenario_id: str = "scenario"
    room_extent_mm: tuple = (6000.0, 6000.0, 2500.0)
    voxel_edge_mm: float = 100.0
    start_position_mm: tuple = (500.0, 500.0, 1200.0)
    heading_rad: float = 0.0
    obstacles: tuple = ()
    distractors: tuple = ()
    detection: DetectionModel = DetectionModel()
    planner: PlannerConfig = PlannerConfig()
    percentile: float = 80.0
    w_aim: float = 0.4
    w_hb: float = 0.6
    context_stride: int = 1
    kde_sigma: float = None
    boundaries: str = "known"
    seed: int = 0
    out_mass_known: float = 0.1
    out_mass_growing: float = 0.5
    sphere_radius_mm: float = 4000.0

    def __post_init__(self):
        object.__setattr__(self, "room_extent_mm",
                           tuple(float(v) for v in self.room_extent_mm))
        object.__setattr__(self, "start_position_mm",
                           tuple(float(v) for v in self.start_position_mm))
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        object.__setattr__(self, "distractors", tuple(self.distractors))
        self.validate()

    def validate(self):
        ext = self.room_extent_mm
        if any(v <= 0 for v in ext):
            raise ScenarioError("room extent_mm must be positive")
        if not 0 < self.voxel_edge_mm <= min(ext):
            raise ScenarioError("voxel_edge_mm must be positive and fit the room")
        if self.boundaries not in ("known", "unknown"):
            raise ScenarioError("boundaries must be 'known' or 'unknown'")
        if not 0.0 < self.percentile <= 100.0:
            raise ScenarioError("percentile must lie in (0, 100]")
        if self.w_aim < 0 or self.w_hb < 0 or self.w_aim + self.w_hb <= 0:
            raise ScenarioError("conspicuity weights must be non-negative "
                                "and not both zero")
        if self.context_stride < 1:
            raise ScenarioError("context_stride must be at least 1")
        if not 0.0 <= self.out_mass_known < 1.0:
            raise ScenarioError("out_mass_known must lie in [0, 1)")
        if not 0.0 <= self.out_mass_growing < 1.0:
            raise ScenarioError("out_mass_growing must lie in [0, 1)")
        if self.sphere_radius_mm <= 0:
            raise ScenarioError("sphere_radius_mm must be positive")
        for name, box in self._named_boxes():
            if any(l < 0 or h > e for l, h, e in zip(box.lo_mm, box.hi_mm, ext)):
                raise ScenarioError("%s must sit inside the room" % name)
        start = self.start_position_mm
        if any(p < 0 or p > e for p, e in zip(start, ext)):
            raise ScenarioError("start_position_mm must sit inside the room")
        for name, box in self._named_boxes():
            if bool(box.contains_points(start)[0]):
                raise ScenarioError("start_position_mm lies inside %s" % name)
        for name, box in self._named_boxes():
            if name != "target" and box.overlaps(self.target):
                raise ScenarioError("target overlaps %s" % name)

    def _named_boxes(self):
        yield "target", self.target
        for i, b in enumerate(self.obstacles):
            yield "obstacle %d" % i, b
        for i, b in enumerate(self.distractors):
            yield "distractor %d" % i, b

    def scene(self):
        return Scene(room_extent_mm=self.room_extent_mm, target=self.target,
                     obstacles=self.obstacles, distractors=self.distractors)

    def build(self):
        """Scene plus its voxelization: (scene, geometry, occupancy)."""
        scene = self.scene()
        geometry, occupancy = scene_occupancy(scene, self.voxel_edge_mm)
        return scene, geometry, occupancy

    def boundary_mode(self):
        return (BoundaryMode.KNOWN if self.boundaries == "known"
                else BoundaryMode.GROWING)

    def out_mass_init(self, mode):
        return (self.out_mass_known if mode == BoundaryMode.KNOWN
                else self.out_mass_growing)

    def planner_config(self, attention_enabled):
        return replace(self.planner, attention_enabled=bool(attention_enabled))


_VEC3 = object()
_FLOATS = object()
_COLOR = object()

_SECTION_KEYS = {
    "room": {"extent_mm": _VEC3, "voxel_edge_mm": float},
    "robot": {"position_mm": _VEC3, "heading_rad": float},
    "target": {"lo_mm": _VEC3, "hi_mm": _VEC3, "color": _COLOR,
               "facing": _VEC3},
    "obstacle": {"lo_mm": _VEC3, "hi_mm": _VEC3, "color": _COLOR},
    "distractor": {"lo_mm": _VEC3, "hi_mm": _VEC3, "color": _COLOR},
    "detection": {"effective_range_mm": float, "peak_prob": float,
                  "max_pose_angle_rad": float,
                  "range_falloff_exponent": float},
    "planner": {"theta_move": float, "budget_k_s": float, "look_cost_s": float,
                "move_speed_mm_s": float, "pan_steps": int,
                "tilt_values_rad": _FLOATS, "move_lattice_mm": float,
                "absent_threshold": float, "gain": float, "fov_w_rad": float,
                "fov_h_rad": float, "max_range_mm": float, "view_width": int,
                "view_height": int},
    "attention": {"percentile": float, "w_aim": float, "w_hb": float,
                  "context_stride": int, "kde_sigma": float},
    "search": {"scenario_id": str, "boundaries": str, "seed": int,
               "out_mass_known": float, "out_mass_growing": float,
               "sphere_radius_mm": float},
}
_REPEATABLE = ("obstacle", "distractor")


def _parse_value(kind, raw, lineno):
    try:
        if kind is _VEC3:
            parts = tuple(float(t) for t in raw.split())
            if len(parts) != 3:
                raise ValueError
            return parts
        if kind is _COLOR:
            parts = tuple(int(t) for t in raw.split())
            if len(parts) != 3 or any(not 0 <= c <= 255 for c in parts):
                raise ValueError
            return parts
        if kind is _FLOATS:
            return tuple(float(t) for t in raw.split())
        if kind is str:
            return raw
        return kind(raw)
    except ValueError:
        raise ScenarioError("line %d: cannot parse value %r" % (lineno, raw))


def parse_scenario(text):
    """Parse scenario text into a validated ScenarioSpec."""
    sections = {}
    boxes = {"obstacle": [], "distractor": []}
    current_name, current = None, None
    for lineno, rawline in enumerate(text.splitlines(), 1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name not in _SECTION_KEYS:
                raise ScenarioError("line %d: unknown section [%s]" % (lineno, name))
            current_name, current = name, {}
            if name in _REPEATABLE:
                boxes[name].append(current)
            elif name in sections:
                raise ScenarioError("line %d: duplicate section [%s]" % (lineno, name))
            else:
                sections[name] = current
            continue
        if "=" not in line:
            raise ScenarioError("line %d: expected 'key = value'" % lineno)
        if current is None:
            raise ScenarioError("line %d: key outside any section" % lineno)
        key, raw = (t.strip() for t in line.split("=", 1))
        schema = _SECTION_KEYS[current_name]
        if key not in schema:
            raise ScenarioError("line %d: unknown key %r in [%s]"
                                % (lineno, key, current_name))
        if key in current:
            raise ScenarioError("line %d: duplicate key %r" % (lineno, key))
        current[key] = _parse_value(schema[key], raw, lineno)

    if "target" not in sections:
        raise ScenarioError("missing [target] section")
    t = sections["target"]
    if "lo_mm" not in t or "hi_mm" not in t:
        raise ScenarioError("[target] needs lo_mm and hi_mm")

    kwargs = {}
    room = sections.get("room", {})
    if "extent_mm" in room:
        kwargs["room_extent_mm"] = room["extent_mm"]
    if "voxel_edge_mm" in room:
        kwargs["voxel_edge_mm"] = room["voxel_edge_mm"]
    robot = sections.get("robot", {})
    if "position_mm" in robot:
        kwargs["start_position_mm"] = robot["position_mm"]
    if "heading_rad" in robot:
        kwargs["heading_rad"] = robot["heading_rad"]
    kwargs["target"] = TargetBox(
        lo_mm=t["lo_mm"], hi_mm=t["hi_mm"],
        color=t.get("color", (200, 40, 40)),
        facing=t.get("facing", (1.0, 0.0, 0.0)))
    for kind, attr in (("obstacle", "obstacles"), ("distractor", "distractors")):
        parsed = []
        for b in boxes[kind]:
            if "lo_mm" not in b or "hi_mm" not in b:
                raise ScenarioError("[%s] needs lo_mm and hi_mm" % kind)
            parsed.append(Box(lo_mm=b["lo_mm"], hi_mm=b["hi_mm"],
                              color=b.get("color", (128, 128, 128))))
        kwargs[attr] = tuple(parsed)
    det = sections.get("detection", {})
    if det:
        kwargs["detection"] = DetectionModel(
            **{("max_pose_angle" if k == "max_pose_angle_rad" else k): v
               for k, v in det.items()})
    plan = sections.get("planner", {})
    if plan:
        rename = {"tilt_values_rad": "tilt_values", "fov_w_rad": "fov_w",
                  "fov_h_rad": "fov_h"}
        kwargs["planner"] = PlannerConfig(
            **{rename.get(k, k): v for k, v in plan.items()})
    for k, v in sections.get("attention", {}).items():
        kwargs[k] = v
    for k, v in sections.get("search", {}).items():
        kwargs[k] = v
    try:
        return ScenarioSpec(**kwargs)
    except ValueError as exc:
        raise ScenarioError(str(exc))


def load_scenario(path):
    with open(path) as fh:
        return parse_scenario(fh.read())


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _fmt_vec(vec):
    return " ".join(_fmt(float(v)) for v in vec)


def _fmt_ints(vec):
    return " ".join(str(int(v)) for v in vec)


def format_scenario(spec):
    """Serialize a spec to scenario text; load(format(s)) == s."""
    det, plan = spec.detection, spec.planner
    lines = [
        "[room]",
        "extent_mm = %s" % _fmt_vec(spec.room_extent_mm),
        "voxel_edge_mm = %s" % _fmt(float(spec.voxel_edge_mm)),
        "",
        "[robot]",
        "position_mm = %s" % _fmt_vec(spec.start_position_mm),
        "heading_rad = %s" % _fmt(float(spec.heading_rad)),
        "",
        "[target]",
        "lo_mm = %s" % _fmt_vec(spec.target.lo_mm),
        "hi_mm = %s" % _fmt_vec(spec.target.hi_mm),
        "color = %s" % _fmt_ints(spec.target.color),
        "facing = %s" % _fmt_vec(spec.target.facing),
    ]
    for kind, seq in (("obstacle", spec.obstacles),
                      ("distractor", spec.distractors)):
        for box in seq:
            lines += ["", "[%s]" % kind,
                      "lo_mm = %s" % _fmt_vec(box.lo_mm),
                      "hi_mm = %s" % _fmt_vec(box.hi_mm),
                      "color = %s" % _fmt_ints(box.color)]
    lines += [
        "",
        "[detection]",
        "effective_range_mm = %s" % _fmt(det.effective_range_mm),
        "peak_prob = %s" % _fmt(det.peak_prob),
        "max_pose_angle_rad = %s" % _fmt(det.max_pose_angle),
        "range_falloff_exponent = %s" % _fmt(det.range_falloff_exponent),
        "",
        "[planner]",
        "theta_move = %s" % _fmt(plan.theta_move),
        "budget_k_s = %s" % _fmt(plan.budget_k_s),
        "look_cost_s = %s" % _fmt(plan.look_cost_s),
        "move_speed_mm_s = %s" % _fmt(plan.move_speed_mm_s),
        "pan_steps = %d" % plan.pan_steps,
        "tilt_values_rad = %s" % _fmt_vec(plan.tilt_values),
        "move_lattice_mm = %s" % _fmt(plan.move_lattice_mm),
        "absent_threshold = %s" % _fmt(plan.absent_threshold),
        "gain = %s" % _fmt(plan.gain),
        "fov_w_rad = %s" % _fmt(plan.fov_w),
        "fov_h_rad = %s" % _fmt(plan.fov_h),
        "view_width = %d" % plan.view_width,
        "view_height = %d" % plan.view_height,
    ]
    if plan.max_range_mm is not None:
        lines.append("max_range_mm = %s" % _fmt(plan.max_range_mm))
    lines += [
        "",
        "[attention]",
        "percentile = %s" % _fmt(spec.percentile),
        "w_aim = %s" % _fmt(spec.w_aim),
        "w_hb = %s" % _fmt(spec.w_hb),
        "context_stride = %d" % spec.context_stride,
    ]
    if spec.kde_sigma is not None:
        lines.append("kde_sigma = %s" % _fmt(spec.kde_sigma))
    lines += [
        "",
        "[search]",
        "scenario_id = %s" % spec.scenario_id,
        "boundaries = %s" % spec.boundaries,
        "seed = %d" % spec.seed,
        "out_mass_known = %s" % _fmt(spec.out_mass_known),
        "out_mass_growing = %s" % _fmt(spec.out_mass_growing),
        "sphere_radius_mm = %s" % _fmt(spec.sphere_radius_mm),
        "",
    ]
    return "\n".join(lines)


def save_scenario(path, spec):
    with open(path, "w") as fh:
        fh.write(format_scenario(spec))


# ---------------------------------------------------------------------------
# Random generation

_TARGET_PALETTE = (
    (205, 35, 35), (35, 170, 45), (40, 70, 205), (230, 120, 25),
    (185, 40, 175), (30, 170, 175),
)
_DISTRACTOR_PALETTE = (
    (235, 205, 40), (150, 75, 160), (60, 120, 90), (210, 150, 120),
)


def _color_jitter(rng, base, spread=18):
    return tuple(int(np.clip(c + rng.integers(-spread, spread + 1), 0, 255))
                 for c in base)


def _sample_box(rng, ext, size_lo, size_hi, on_floor, height_hi=None):
    size = rng.uniform(size_lo, size_hi, size=3)
    if height_hi is not None:
        size[2] = rng.uniform(600.0, height_hi)
    cx = rng.uniform(size[0] / 2 + 50, ext[0] - size[0] / 2 - 50)
    cy = rng.uniform(size[1] / 2 + 50, ext[1] - size[1] / 2 - 50)
    if on_floor:
        lo_z = 0.0
    else:
        lo_z = rng.uniform(150.0, min(1800.0, ext[2] - size[2] - 50))
    lo = (cx - size[0] / 2, cy - size[1] / 2, lo_z)
    hi = (cx + size[0] / 2, cy + size[1] / 2, lo_z + size[2])
    return lo, hi


def _inflate(box, margin):
    return Box(tuple(l - margin for l in box.lo_mm),
               tuple(h + margin for h in box.hi_mm))


def _view_reachable(start, center, tilt_values, fov_h):
    """Whether some tilt can bring the point into the vertical field."""
    d = np.asarray(center) - np.asarray(start)
    horiz = math.hypot(d[0], d[1])
    el = math.atan2(d[2], horiz)
    band = max(abs(t) for t in tilt_values) + fov_h / 2.0
    return abs(el) <= band - math.radians(2.0)


def _recognizable_position_exists(geometry, occupancy, target_center, planner,
                                  z_mm, radius_mm):
    """Whether some move-lattice position can actually recognize the target.

    Mirrors the planner's lattice (origin + s/2 + i*s per axis at the
    robot's travel height): a qualifying position sits in a Free voxel
    within ``radius_mm`` of the target, sees it over an unobstructed
    segment, and can bring it into the vertical field of view.
    """
    s = planner.move_lattice_mm
    ox, oy, _ = geometry.origin_mm
    ext = geometry.extent_mm
    t = np.asarray(target_center, dtype=np.float64)
    i = 0
    while ox + s / 2 + i * s < ox + ext[0]:
        x = ox + s / 2 + i * s
        i += 1
        if abs(x - t[0]) > radius_mm:
            continue
        j = 0
        while oy + s / 2 + j * s < oy + ext[1]:
            y = oy + s / 2 + j * s
            j += 1
            pos = np.array([x, y, z_mm])
            if np.linalg.norm(pos - t) > radius_mm:
                continue
            ijk = geometry.point_to_index(pos)
            if ijk is None or occupancy.label_at(ijk) != 0:
                continue
            if not _view_reachable(pos, t, planner.tilt_values, planner.fov_h):
                continue
            if segment_clear(occupancy, pos, t):
                return True
    return False


def random_scenario(seed, scenario_id=None, profile="mixed",
                    voxel_edge_mm=None):
    """Generate a random solvable scenario.

    Profiles set the start-to-target distance: "near" keeps the target
    inside recognition range with a clear line of sight (the search can
    finish without moving), "far" pushes it well beyond recognition
    range (a move is required before recognition can succeed), "mixed"
    flips a coin per scenario.  Rejection sampling enforces the
    placement invariants, so generation always terminates with a valid
    spec.
    """
    if profile not in ("near", "far", "mixed"):
        raise ScenarioError("unknown profile %r" % profile)
    rng = np.random.default_rng(seed)
    if voxel_edge_mm is None:
        voxel_edge_mm = 125.0
    detection = DetectionModel(max_pose_angle=math.pi,
                               range_falloff_exponent=4.0)
    r_rec = detection.effective_range_mm
    planner = PlannerConfig(gain=20.0, max_range_mm=r_rec,
                            theta_move=0.01)

    for _ in range(200):
        if profile == "far":
            nx = int(rng.integers(44, 49))
            ny = int(rng.integers(44, 49))
            nz = 20
        else:
            nx = int(rng.integers(36, 49))
            ny = int(rng.integers(36, 49))
            nz = 20
        ext = (nx * voxel_edge_mm, ny * voxel_edge_mm, nz * voxel_edge_mm)

        obstacles = []
        n_obst = int(rng.integers(2, 5))
        for _ in range(n_obst):
            for _ in range(40):
                lo, hi = _sample_box(rng, ext, 400.0, 1000.0, on_floor=True,
                                     height_hi=2000.0)
                cand = Box(lo, hi, _color_jitter(rng, (125, 110, 95), 25))
                if not any(cand.overlaps(_inflate(o, 150)) for o in obstacles):
                    obstacles.append(cand)
                    break

        start = None
        for _ in range(80):
            p = (rng.uniform(400, ext[0] - 400), rng.uniform(400, ext[1] - 400),
                 1200.0)
            if not any(_inflate(o, 250).contains_points(p)[0] for o in obstacles):
                start = p
                break
        if start is None:
            continue

        want_near = profile == "near" or (profile == "mixed"
                                          and rng.random() < 0.5)
        if want_near:
            d_lo, d_hi = 1300.0, 0.80 * r_rec
        else:
            d_lo = 1.5 * r_rec
            d_hi = max(d_lo + 300.0,
                       min(2.3 * r_rec,
                           0.92 * math.hypot(ext[0], ext[1])))

        target = None
        for _ in range(200):
            edge = rng.uniform(260.0, 400.0)
            dist = rng.uniform(d_lo, d_hi)
            ang = rng.uniform(0.0, 2.0 * math.pi)
            cz = rng.uniform(600.0, 1700.0)
            c = (start[0] + dist * math.cos(ang),
                 start[1] + dist * math.sin(ang), cz)
            lo = tuple(v - edge / 2 for v in c)
            hi = tuple(v + edge / 2 for v in c)
            if any(l < 80 or h > e - 80 for l, h, e in zip(lo, hi, ext)):
                continue
            if not _view_reachable(start, c, planner.tilt_values, planner.fov_h):
                continue
            cand = TargetBox(lo, hi, _color_jitter(rng, _TARGET_PALETTE[
                int(rng.integers(len(_TARGET_PALETTE)))]), facing=(0.0, 0.0, 1.0))
            if any(cand.overlaps(_inflate(o, 100)) for o in obstacles):
                continue
            target = cand
            break
        if target is None:
            continue

        distractors = []
        for _ in range(int(rng.integers(1, 3))):
            for _ in range(40):
                lo, hi = _sample_box(rng, ext, 150.0, 350.0, on_floor=False)
                cand = Box(lo, hi, _color_jitter(rng, _DISTRACTOR_PALETTE[
                    int(rng.integers(len(_DISTRACTOR_PALETTE)))]))
                if (not any(cand.overlaps(_inflate(o, 100)) for o in obstacles)
                        and not cand.overlaps(_inflate(target, 200))
                        and not _inflate(cand, 250).contains_points(start)[0]):
                    distractors.append(cand)
                    break

        spec = ScenarioSpec(
            target=target,
            scenario_id=scenario_id or ("rand-%d" % seed),
            room_extent_mm=ext, voxel_edge_mm=voxel_edge_mm,
            start_position_mm=start,
            heading_rad=float(rng.uniform(0.0, 2.0 * math.pi)),
            obstacles=tuple(obstacles), distractors=tuple(distractors),
            detection=detection, planner=planner,
            context_stride=4, sphere_radius_mm=2000.0, seed=int(seed))

        _, geometry, occupancy = spec.build()
        t_center = np.asarray(target.center)
        t_ijk = geometry.point_to_index(t_center)
        s_ijk = geometry.point_to_index(start)
        if t_ijk is None or s_ijk is None:
            continue
        if occupancy.label_at(t_ijk) != 0 or occupancy.label_at(s_ijk) != 0:
            continue
        if not segment_clear(occupancy, np.asarray(start), t_center):
            continue
        if not _recognizable_position_exists(geometry, occupancy, t_center,
                                             planner, start[2],
                                             0.7 * r_rec):
            continue
        return spec
    raise ScenarioError("could not generate a valid scenario for seed %d" % seed)
