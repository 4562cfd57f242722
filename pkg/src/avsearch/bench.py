"""Experiment harness: single runs, benchmark matrices, CSV metrics.

run_experiment executes one scenario under one (mode, boundaries)
combination and reduces the search log to a MetricsRecord.  Attention
runs build their object model the way a robot would be briefed: the
target box is rendered from close up, EM segmentation extracts the
foreground, and its color histogram becomes the backprojection model.

run_benchmark generates a seeded batch of random scenarios and runs
every requested combination on each, pairing trials through a shared
per-scenario recognition seed so mode comparisons see identical
detection luck.  Records always come back in (scenario, mode,
boundaries) order no matter how many worker processes ran them, and
the CSV emitted from a fixed seed is byte-identical across reruns.
"""

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .attention import AttentionContext
from .backprojection import build_histogram
from .belief import BoundaryMode
from .camera import CameraConfig
from .io_formats import load_filter_bank
from .planner import run_search
from .render import render
from .saliency import DensityConfig
from .scenario import random_scenario
from .segmentation import segment_template

MODES = ("baseline", "attention")
BOUNDARIES = ("known", "unknown")
CSV_HEADER = ("scenario_id", "seed", "mode", "boundaries", "result",
              "category", "actions", "moves", "sim_time_s", "distance_m")

_default_bank_cache = []


@dataclass(frozen=True)
class MetricsRecord:
    scenario_id: str
    seed: int
    mode: str
    boundaries: str
    result: str
    category: str
    actions: int
    moves: int
    sim_time_s: float
    distance_m: float


def default_filter_bank():
    """The packaged 25-filter 8x8 bank (cached per process)."""
    if not _default_bank_cache:
        ref = resources.files("avsearch").joinpath("data/default_filters.txt")
        with resources.as_file(ref) as path:
            _default_bank_cache.append(load_filter_bank(path))
    return _default_bank_cache[0]


def template_view(spec, distance_mm=1200.0, size=48):
    """Render the target from close up, as a briefing photo would."""
    scene = spec.scene()
    start = np.asarray(spec.start_position_mm, dtype=np.float64)
    center = np.asarray(spec.target.center, dtype=np.float64)
    offset = center - start
    gap = float(np.linalg.norm(offset))
    if gap > distance_mm:
        pos = center - offset / gap * distance_mm
    else:
        pos = start
    d = center - pos
    pan = math.atan2(d[1], d[0])
    tilt = math.atan2(d[2], math.hypot(d[0], d[1]))
    cam = CameraConfig(position_mm=tuple(pos), pan=pan, tilt=tilt,
                       fov_w=spec.planner.fov_w, fov_h=spec.planner.fov_h)
    return render(scene, cam, size, size)


def attention_context(spec, bank=None):
    """Build the attention model for a scenario's target."""
    if bank is None:
        bank = default_filter_bank()
    template = segment_template(template_view(spec).rgb)
    hist = build_histogram(template)
    density = DensityConfig(sigma=spec.kde_sigma,
                            context_stride=spec.context_stride)
    return AttentionContext(filter_bank=bank, histogram=hist, density=density,
                            percentile=spec.percentile, w_aim=spec.w_aim,
                            w_hb=spec.w_hb)


def run_experiment(spec, mode="baseline", boundaries=None, seed=None,
                   bank=None):
    """One search run; returns (MetricsRecord, SearchLog)."""
    if mode not in MODES:
        raise ValueError("mode must be one of %s" % (MODES,))
    if boundaries is None:
        boundaries = spec.boundaries
    if boundaries not in BOUNDARIES:
        raise ValueError("boundaries must be one of %s" % (BOUNDARIES,))
    if seed is None:
        seed = spec.seed
    scene, geometry, occupancy = spec.build()
    config = spec.planner_config(attention_enabled=(mode == "attention"))
    attention = attention_context(spec, bank) if mode == "attention" else None
    bmode = BoundaryMode.KNOWN if boundaries == "known" else BoundaryMode.GROWING
    log = run_search(scene, geometry, occupancy, spec.detection, config, bmode,
                     seed, spec.start_position_mm, heading=spec.heading_rad,
                     attention=attention,
                     out_mass_init=spec.out_mass_init(bmode),
                     sphere_radius_mm=spec.sphere_radius_mm)
    record = MetricsRecord(
        scenario_id=spec.scenario_id, seed=int(seed), mode=mode,
        boundaries=boundaries, result=log.result,
        category="NM" if log.moves == 0 else "M",
        actions=log.actions, moves=log.moves,
        sim_time_s=float(log.sim_time_s), distance_m=float(log.distance_m))
    return record, log


def benchmark_scenarios(count, seed, profile="mixed"):
    """The seeded scenario batch a benchmark run works through."""
    specs = []
    for i in range(count):
        child = int(np.random.SeedSequence([seed, i]).generate_state(1)[0])
        specs.append(random_scenario(child, scenario_id="rand-%04d" % i,
                                     profile=profile))
    return specs


def _run_indexed(task):
    idx, spec, mode, boundaries = task
    record, _ = run_experiment(spec, mode=mode, boundaries=boundaries)
    return idx, record


def run_benchmark(count, seed, modes=MODES, boundaries=("known",),
                  profile="mixed", jobs=1, progress=None):
    """Run the full matrix over a seeded scenario batch.

    Returns MetricsRecords ordered by (scenario, mode, boundaries).
    ``jobs`` > 1 fans scenarios out over worker processes; the order and
    content of the result do not depend on it.
    """
    specs = benchmark_scenarios(count, seed, profile)
    tasks = []
    for spec in specs:
        for mode in modes:
            for bd in boundaries:
                tasks.append((len(tasks), spec, mode, bd))
    records = [None] * len(tasks)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for idx, record in pool.map(_run_indexed, tasks, chunksize=1):
                records[idx] = record
                if progress:
                    progress(record)
    else:
        for task in tasks:
            idx, record = _run_indexed(task)
            records[idx] = record
            if progress:
                progress(record)
    return records


def emit_csv(records, path):
    """Write records to CSV under the fixed header."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in records:
            writer.writerow([r.scenario_id, r.seed, r.mode, r.boundaries,
                             r.result, r.category, r.actions, r.moves,
                             "%.3f" % r.sim_time_s, "%.3f" % r.distance_m])


def read_csv(path):
    """Parse a metrics CSV back into MetricsRecords."""
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != CSV_HEADER:
            raise ValueError("unexpected CSV header")
        for row in reader:
            out.append(MetricsRecord(
                scenario_id=row[0], seed=int(row[1]), mode=row[2],
                boundaries=row[3], result=row[4], category=row[5],
                actions=int(row[6]), moves=int(row[7]),
                sim_time_s=float(row[8]), distance_m=float(row[9])))
    return out


def summarize(records):
    """Mean metrics per (mode, boundaries) split into NM / M / Overall."""
    lines = ["%-22s %-8s %5s %8s %6s %10s %10s" %
             ("mode/boundaries", "group", "runs", "found%", "acts", "time_s", "dist_m")]
    combos = sorted({(r.mode, r.boundaries) for r in records})
    for mode, bd in combos:
        sel = [r for r in records if r.mode == mode and r.boundaries == bd]
        for group in ("NM", "M", "Overall"):
            sub = sel if group == "Overall" else [r for r in sel
                                                  if r.category == group]
            if not sub:
                lines.append("%-22s %-8s %5d" % ("%s/%s" % (mode, bd), group, 0))
                continue
            found = 100.0 * sum(r.result == "Found" for r in sub) / len(sub)
            acts = sum(r.actions for r in sub) / len(sub)
            tsec = sum(r.sim_time_s for r in sub) / len(sub)
            dist = sum(r.distance_m for r in sub) / len(sub)
            lines.append("%-22s %-8s %5d %7.0f%% %6.2f %10.1f %10.2f" %
                         ("%s/%s" % (mode, bd), group, len(sub), found, acts,
                          tsec, dist))
    return "\n".join(lines)
