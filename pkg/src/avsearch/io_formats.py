"""File formats: binary PPM/PGM images, filter banks, histograms.

Images use the binary netpbm formats: P6 with maxval 255 for RGB, P5
for grayscale (maxval 255) and for depth maps (maxval 65535, big
endian, centimeter units so a 655 m range fits).  Filter banks and
color histograms are whitespace-separated text with a one-line header,
so they diff cleanly and round-trip exactly via repr-precision floats.
"""

import numpy as np

from .backprojection import ColorHistogram
from .saliency import FilterBank


def write_ppm(path, rgb):
    rgb = np.asarray(rgb, dtype=np.uint8)
    h, w, _ = rgb.shape
    with open(path, "wb") as fh:
        fh.write(b"P6\n%d %d\n255\n" % (w, h))
        fh.write(rgb.tobytes())


def read_ppm(path):
    with open(path, "rb") as fh:
        magic, (w, h), maxval, data = _read_pnm(fh)
    if magic != b"P6":
        raise ValueError("not a binary PPM (P6) file")
    if maxval != 255:
        raise ValueError("unsupported PPM maxval %d" % maxval)
    return np.frombuffer(data, dtype=np.uint8).reshape(h, w, 3).copy()


def write_pgm(path, gray):
    gray = np.asarray(gray, dtype=np.uint8)
    h, w = gray.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (w, h))
        fh.write(gray.tobytes())


def write_pgm16(path, values):
    """16-bit big-endian PGM; values are clamped to [0, 65535]."""
    v = np.clip(np.asarray(values), 0, 65535).astype(">u2")
    h, w = v.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n65535\n" % (w, h))
        fh.write(v.tobytes())


def read_pgm(path):
    """Read P5 grayscale; returns uint8 or uint16 depending on maxval."""
    with open(path, "rb") as fh:
        magic, (w, h), maxval, data = _read_pnm(fh)
    if magic != b"P5":
        raise ValueError("not a binary PGM (P5) file")
    if maxval <= 255:
        return np.frombuffer(data, dtype=np.uint8).reshape(h, w).copy()
    return np.frombuffer(data, dtype=">u2").reshape(h, w).astype(np.uint16)


def _read_pnm(fh):
    magic = fh.read(2)
    fields = []
    while len(fields) < 3:
        line = fh.readline()
        if not line:
            raise ValueError("truncated netpbm header")
        body = line.split(b"#", 1)[0]
        fields.extend(int(tok) for tok in body.split())
    w, h, maxval = fields[:3]
    bytes_per = 2 if maxval > 255 else 1
    channels = 3 if magic == b"P6" else 1
    data = fh.read(w * h * channels * bytes_per)
    if len(data) < w * h * channels * bytes_per:
        raise ValueError("truncated netpbm payload")
    return magic, (w, h), maxval, data


def write_depth_pgm(path, depth_mm):
    """Depth map export: millimeters stored as centimeters, 16-bit."""
    cm = np.rint(np.asarray(depth_mm, dtype=np.float64) / 10.0)
    write_pgm16(path, cm)


def save_saliency_pgm(path, saliency):
    """Min-max scale a saliency map to 8 bits and save it."""
    v = np.asarray(saliency, dtype=np.float64)
    lo, hi = float(v.min()), float(v.max())
    scaled = np.zeros_like(v) if hi <= lo else (v - lo) / (hi - lo)
    write_pgm(path, np.rint(scaled * 255.0).astype(np.uint8))


def _write_matrix_rows(fh, matrix):
    for row in matrix:
        fh.write(" ".join(repr(float(v)) for v in row))
        fh.write("\n")


def save_filter_bank(path, bank):
    """Text format: `AIM-FILTERS <n> <m>`, whitening rows, filter rows."""
    with open(path, "w") as fh:
        fh.write("AIM-FILTERS %d %d\n" % (bank.n_filters, bank.patch_edge))
        _write_matrix_rows(fh, bank.whitening)
        _write_matrix_rows(fh, bank.filters)


def load_filter_bank(path):
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 3 or header[0] != "AIM-FILTERS":
            raise ValueError("not an AIM-FILTERS file")
        n, m = int(header[1]), int(header[2])
        d = 3 * m * m
        values = np.loadtxt(fh, dtype=np.float64, ndmin=2)
    if values.shape != (d + n, d):
        raise ValueError("filter bank dimensions do not match the header")
    return FilterBank(patch_edge=m, n_filters=n, whitening=values[:d],
                      filters=values[d:])


def save_histogram(path, hist):
    """Text format: `HIST3D <B>` then the B^3 weights, row-major."""
    with open(path, "w") as fh:
        fh.write("HIST3D %d\n" % hist.bins_per_channel)
        for v in hist.weights.ravel():
            fh.write(repr(float(v)))
            fh.write("\n")


def load_histogram(path):
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2 or header[0] != "HIST3D":
            raise ValueError("not a HIST3D file")
        b = int(header[1])
        values = np.loadtxt(fh, dtype=np.float64)
    if values.size != b ** 3:
        raise ValueError("histogram size does not match the header")
    return ColorHistogram(bins_per_channel=b, weights=values.reshape(b, b, b))
