"""Command-line entry points for running searches and the attention tools.

Subcommands:
  run           one search on a scenario file, metrics + action log to a dir
  bench         randomized paired benchmark, CSV + summary table
  learn-filters train a saliency filter bank from PPM images
  saliency      bottom-up saliency map of one image
  backproject   color-histogram backprojection of one image

Every command exits 0 on success and nonzero with a message on stderr.
"""

import argparse
import os
import sys

import numpy as np

from .backprojection import backproject, build_histogram
from .bench import (MODES, BOUNDARIES, default_filter_bank, emit_csv,
                    run_benchmark, run_experiment, summarize)
from .io_formats import (load_filter_bank, load_histogram, read_ppm,
                         save_filter_bank, save_saliency_pgm)
from .saliency import aim_saliency, learn_filter_bank, sample_patches
from .scenario import load_scenario
from .segmentation import segment_template


def _write_log(path, log):
    """Dump a search log as one line per action."""
    with open(path, "w") as fh:
        fh.write("result %s\n" % log.result)
        if log.found_position_mm is not None:
            fh.write("found_at %.1f %.1f %.1f\n" % tuple(log.found_position_mm))
        for rec in log.records:
            if rec.kind == "look":
                fh.write("look id=%s covering=%.6f detected=%d t=%.1f\n"
                         % (rec.action_id, rec.covering, rec.detected,
                            rec.t_after_s))
            else:
                fh.write("move to=(%.0f,%.0f,%.0f) dist=%.0f t=%.1f\n"
                         % (*rec.to_mm, rec.distance_mm, rec.t_after_s))


def cmd_run(args):
    spec = load_scenario(args.scenario)
    record, log = run_experiment(spec, mode=args.mode,
                                 boundaries=args.boundaries, seed=args.seed)
    os.makedirs(args.out, exist_ok=True)
    emit_csv([record], os.path.join(args.out, "metrics.csv"))
    _write_log(os.path.join(args.out, "log.txt"), log)
    print("%s: %s after %d actions (%d moves, %.1f s simulated)"
          % (record.scenario_id, record.result, record.actions,
             record.moves, record.sim_time_s))
    return 0


def cmd_bench(args):
    modes = tuple(args.modes.split(","))
    for m in modes:
        if m not in MODES:
            raise ValueError("unknown mode %r (choose from %s)" % (m, MODES))
    bounds = tuple(args.boundaries.split(","))
    for b in bounds:
        if b not in BOUNDARIES:
            raise ValueError("unknown boundaries %r (choose from %s)"
                             % (b, BOUNDARIES))
    records = run_benchmark(args.count, args.seed, modes=modes,
                            boundaries=bounds, profile=args.profile,
                            jobs=args.jobs)
    os.makedirs(args.out, exist_ok=True)
    emit_csv(records, os.path.join(args.out, "results.csv"))
    table = summarize(records)
    with open(os.path.join(args.out, "summary.txt"), "w") as fh:
        fh.write(table + "\n")
    print(table)
    return 0


def cmd_learn_filters(args):
    names = sorted(n for n in os.listdir(args.patches)
                   if n.lower().endswith(".ppm"))
    if not names:
        raise ValueError("no .ppm images in %s" % args.patches)
    dim = 3 * args.size * args.size
    needed = max(20 * dim, 4000)
    per_image = -(-needed // len(names))
    rng = np.random.default_rng(args.seed)
    patches = [sample_patches(read_ppm(os.path.join(args.patches, n)),
                              args.size, per_image, rng) for n in names]
    bank = learn_filter_bank(np.concatenate(patches), args.n, seed=args.seed)
    save_filter_bank(args.out, bank)
    print("trained %d filters (%dx%d) from %d patches in %d images"
          % (args.n, args.size, args.size, per_image * len(names), len(names)))
    return 0


def cmd_saliency(args):
    image = read_ppm(args.image)
    bank = (load_filter_bank(args.filters) if args.filters
            else default_filter_bank())
    save_saliency_pgm(args.out, aim_saliency(image, bank))
    print("wrote %s" % args.out)
    return 0


def _load_template_histogram(path):
    """A template may be a PPM image or a saved histogram file."""
    with open(path, "rb") as fh:
        magic = fh.read(6)
    if magic == b"HIST3D":
        return load_histogram(path)
    return build_histogram(segment_template(read_ppm(path)))


def cmd_backproject(args):
    image = read_ppm(args.image)
    hist = _load_template_histogram(args.template)
    save_saliency_pgm(args.out, backproject(image, hist))
    print("wrote %s" % args.out)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="avsearch",
        description="Attentive active visual search simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one scenario")
    p.add_argument("--scenario", required=True, help="scenario file")
    p.add_argument("--mode", default="baseline", choices=MODES)
    p.add_argument("--boundaries", default=None, choices=BOUNDARIES,
                   help="override the scenario's boundary mode")
    p.add_argument("--seed", type=int, default=None,
                   help="override the scenario's recognition seed")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench", help="randomized paired benchmark")
    p.add_argument("--count", type=int, required=True,
                   help="number of generated scenarios")
    p.add_argument("--seed", type=int, required=True,
                   help="scenario generator seed")
    p.add_argument("--modes", default="baseline,attention",
                   help="comma-separated planner modes")
    p.add_argument("--boundaries", default="known",
                   help="comma-separated boundary modes")
    p.add_argument("--profile", default="mixed",
                   choices=("near", "far", "mixed"))
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel worker processes")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("learn-filters", help="train a saliency filter bank")
    p.add_argument("--patches", required=True,
                   help="directory of PPM training images")
    p.add_argument("--n", type=int, default=25, help="number of filters")
    p.add_argument("--size", type=int, default=8, help="patch edge in pixels")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output bank file")
    p.set_defaults(func=cmd_learn_filters)

    p = sub.add_parser("saliency", help="bottom-up saliency map of an image")
    p.add_argument("--image", required=True, help="input PPM")
    p.add_argument("--filters", default=None,
                   help="filter bank file (default: packaged bank)")
    p.add_argument("--out", required=True, help="output PGM")
    p.set_defaults(func=cmd_saliency)

    p = sub.add_parser("backproject", help="histogram backprojection")
    p.add_argument("--image", required=True, help="input PPM")
    p.add_argument("--template", required=True,
                   help="target template PPM or saved histogram")
    p.add_argument("--out", required=True, help="output PGM")
    p.set_defaults(func=cmd_backproject)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
