"""Color histogram backprojection and the conspicuity combination.

Colors are first normalized pixel-wise (each channel divided by the
channel sum) to shed illumination level, then binned into a coarse 3D
histogram.  Backprojecting a target histogram onto a new image scores
every pixel by how strongly its color belongs to the target; fusing
that (60%) with bottom-up saliency (40%) gives the conspicuity map
that drives the belief update.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ColorHistogram:
    bins_per_channel: int
    weights: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        b = self.bins_per_channel
        if self.weights.shape != (b, b, b):
            raise ValueError("weights must be B x B x B")
        if np.any(self.weights < 0):
            raise ValueError("weights must be non-negative")
        if self.normalized and abs(float(self.weights.sum()) - 1.0) >= 1e-9:
            raise ValueError("normalized histogram must sum to 1")


def chromatic_normalize(image):
    """Per-pixel chromatic normalization: c' = round(255 c / (r+g+b)).

    Rounding is half-up; pixels with channel sum 0 stay (0, 0, 0).
    """
    img = np.asarray(image, dtype=np.float64)
    s = img.sum(axis=2, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.floor(255.0 * img / s + 0.5)
    out[np.repeat(s == 0.0, 3, axis=2)] = 0.0
    return out.astype(np.uint8)


def _bin_indices(normalized_image, bins):
    idx = (normalized_image.astype(np.int64) * bins) // 256
    return np.minimum(idx, bins - 1)


def build_histogram(template, bins_per_channel=8):
    """Normalized 3D color histogram of a template's foreground pixels."""
    norm = chromatic_normalize(template.rgb)
    idx = _bin_indices(norm[template.mask], bins_per_channel)
    weights = np.zeros((bins_per_channel,) * 3, dtype=np.float64)
    np.add.at(weights, (idx[:, 0], idx[:, 1], idx[:, 2]), 1.0)
    weights /= weights.sum()
    return ColorHistogram(bins_per_channel=bins_per_channel, weights=weights)


def backproject(image, hist, mask=None):
    """Histogram backprojection: each pixel scores its color's weight.

    The raw weights are scaled by their maximum so the best-matching
    pixel reads 1.0 (an all-zero map stays zero).  With ``mask`` given,
    only masked-in pixels are scored and the scaling maximum is taken
    over those pixels alone.
    """
    if not hist.normalized:
        raise ValueError("histogram must be normalized")
    norm = chromatic_normalize(image)
    idx = _bin_indices(norm, hist.bins_per_channel)
    vals = hist.weights[idx[:, :, 0], idx[:, :, 1], idx[:, :, 2]]
    if mask is not None:
        if mask.shape != vals.shape:
            raise ValueError("mask dimensions differ from the image")
        vals = np.where(mask, vals, 0.0)
        peak = float(vals[mask].max()) if mask.any() else 0.0
    else:
        peak = float(vals.max())
    if peak > 0.0:
        vals = vals / peak
    return vals


def _minmax(values):
    lo = float(values.min())
    hi = float(values.max())
    if hi <= lo:
        return np.zeros_like(values)
    return (values - lo) / (hi - lo)


def combine_conspicuity(saliency, backprojection, w_aim=0.4, w_hb=0.6):
    """Convex combination of min-max normalized saliency and backprojection."""
    s = np.asarray(saliency, dtype=np.float64)
    b = np.asarray(backprojection, dtype=np.float64)
    if s.shape != b.shape:
        raise ValueError("saliency and backprojection dimensions differ")
    return w_aim * _minmax(s) + w_hb * _minmax(b)
