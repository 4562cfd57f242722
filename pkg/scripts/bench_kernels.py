"""Time the numba kernels against their numpy fallbacks.

Runs both engines on identical inputs for the two hot spots (Gaussian
KDE over coefficient maps, line-of-sight voxel traversal), checks they
agree, and prints a timing table.  Useful when deciding whether numba
is worth installing on a given machine.
"""

import time

import numpy as np

from avsearch import engine
from avsearch.scenario import random_scenario


def time_call(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def kde_inputs(n_queries=3249, n_context=225, seed=0):
    # Sizes match one filter map of a 64x64 view at context stride 4.
    rng = np.random.default_rng(seed)
    queries = rng.normal(0.0, 1.5, n_queries)
    context = rng.normal(0.0, 1.5, n_context)
    weights = np.full(n_context, 1.0 / n_context)
    return queries, context, weights, 0.35


def visibility_inputs(seed=3):
    spec = random_scenario(seed, profile="far")
    _, geometry, occupancy = spec.build()
    centers = geometry.centers()
    cam = np.asarray(spec.start_position_mm, dtype=np.float64)
    nx, ny, nz = geometry.dims
    ox, oy, oz = geometry.origin_mm
    return (occupancy.labels, nx, ny, nz, ox, oy, oz,
            geometry.voxel_edge_mm, cam[0], cam[1], cam[2],
            centers[:, 0].copy(), centers[:, 1].copy(), centers[:, 2].copy())


def main():
    try:
        engine.select("numba")
    except RuntimeError:
        print("numba is not importable; nothing to compare")
        return

    kq = kde_inputs()
    vq = visibility_inputs()
    rows = []
    results = {}
    for name in ("numba", "numpy"):
        engine.select(name)
        k = engine.kernels()
        # First call includes JIT compilation for numba; time it apart.
        t0 = time.perf_counter()
        results[name, "kde"] = k.kde_density(*kq)
        results[name, "vis"] = k.visible_from(*vq)
        warm = time.perf_counter() - t0
        rows.append((name, warm,
                     time_call(k.kde_density, *kq),
                     time_call(k.visible_from, *vq)))
    engine.select("auto")

    np.testing.assert_allclose(results["numba", "kde"], results["numpy", "kde"],
                               rtol=1e-12, atol=0)
    if not np.array_equal(results["numba", "vis"], results["numpy", "vis"]):
        raise SystemExit("engines disagree on visibility")

    print("%-8s %12s %14s %14s" % ("engine", "first_s", "kde_s", "visible_s"))
    for name, warm, kde_t, vis_t in rows:
        print("%-8s %12.3f %14.5f %14.5f" % (name, warm, kde_t, vis_t))
    base = dict((r[0], r) for r in rows)
    print("speedup: kde %.1fx, visibility %.1fx"
          % (base["numpy"][2] / base["numba"][2],
             base["numpy"][3] / base["numba"][3]))


if __name__ == "__main__":
    main()
