"""Regenerate the packaged default filter bank.

Trains the 25-filter 8x8 ICA bank shipped in avsearch/data from a
seeded mix of rendered scene views and procedural textures, then writes
it with full float precision.  Rerunning this script reproduces the
checked-in file bit for bit.

Usage: python scripts/make_default_bank.py [out_path]
"""

import math
import sys

import numpy as np

from avsearch.camera import CameraConfig
from avsearch.io_formats import save_filter_bank
from avsearch.render import render
from avsearch.saliency import learn_filter_bank, sample_patches
from avsearch.scenario import random_scenario

PATCH_EDGE = 8
N_FILTERS = 25
SEED = 2024


def _stripes(rng, size=64):
    ang = rng.uniform(0, math.pi)
    period = rng.uniform(4.0, 16.0)
    ys, xs = np.mgrid[0:size, 0:size]
    phase = (xs * math.cos(ang) + ys * math.sin(ang)) / period
    a = (np.sin(2 * math.pi * phase) > 0).astype(np.float64)
    c0 = rng.uniform(30, 225, 3)
    c1 = rng.uniform(30, 225, 3)
    return (a[..., None] * c0 + (1 - a[..., None]) * c1).astype(np.uint8)


def _smooth_noise(rng, size=64):
    coarse = rng.uniform(0, 255, (9, 9, 3))
    reps = int(np.ceil(size / 8))
    img = np.kron(coarse, np.ones((8, 8, 1)))[:size, :size, :]
    fine = rng.normal(0, 12, (size, size, 3))
    return np.clip(img + fine, 0, 255).astype(np.uint8)


def _checker(rng, size=64):
    cell = int(rng.integers(4, 12))
    ys, xs = np.mgrid[0:size, 0:size]
    a = ((xs // cell + ys // cell) % 2).astype(np.float64)
    c0 = rng.uniform(30, 225, 3)
    c1 = rng.uniform(30, 225, 3)
    return (a[..., None] * c0 + (1 - a[..., None]) * c1).astype(np.uint8)


def gather_patches(seed=SEED):
    rng = np.random.default_rng(seed)
    patches = []

    for i in range(16):
        spec = random_scenario(10_000 + i, profile="mixed")
        scene, _, _ = spec.build()
        pos = spec.start_position_mm
        for pan in (0.0, 2.0 * math.pi / 3.0, 4.0 * math.pi / 3.0):
            cam = CameraConfig(position_mm=pos, pan=pan, tilt=0.0,
                               fov_w=spec.planner.fov_w, fov_h=spec.planner.fov_h)
            view = render(scene, cam, 64, 64)
            patches.append(sample_patches(view.rgb, PATCH_EDGE, 90, rng))

    makers = (_stripes, _smooth_noise, _checker)
    for i in range(54):
        img = makers[i % len(makers)](rng)
        patches.append(sample_patches(img, PATCH_EDGE, 60, rng))

    return np.concatenate(patches)


def main(out_path):
    patches = gather_patches()
    print("training on %d patches of %dx%dx3" % (len(patches), PATCH_EDGE, PATCH_EDGE))
    bank = learn_filter_bank(patches, N_FILTERS, seed=SEED)
    save_filter_bank(out_path, bank)
    print("wrote", out_path)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "src/avsearch/data/default_filters.txt")
