"""Bottom-up saliency by information maximization.

An ICA filter bank turns each image neighborhood into a coefficient
vector.  Per filter, a Gaussian kernel density over the map's own
coefficients estimates how probable each response is; treating filters
as independent, the joint probability of a pixel's neighborhood is the
product over filters, and its self-information (negative log) is the
saliency.  Rare structure (in the learned basis) scores high.

Filter learning is fixed-point FastICA with a tanh nonlinearity on
ZCA-whitened patches, so isotropic input yields a near-identity
whitening transform and the filter rows stay orthogonal in whitened
coordinates.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import engine


@dataclass(frozen=True)
class FilterBank:
    """ICA basis for m x m RGB patches.

    ``whitening`` maps centered patch vectors (length 3m^2, layout
    row-major y, x, channel) to whitened coordinates; ``filters`` holds
    n unit-norm rows in pixel space.
    """

    patch_edge: int
    n_filters: int
    whitening: np.ndarray
    filters: np.ndarray

    def __post_init__(self):
        d = 3 * self.patch_edge ** 2
        if self.whitening.shape != (d, d):
            raise ValueError("whitening matrix must be (3m^2, 3m^2)")
        if self.filters.shape != (self.n_filters, d):
            raise ValueError("filters must be (n_filters, 3m^2)")


@dataclass(frozen=True)
class DensityConfig:
    """Kernel density settings for coefficient maps.

    sigma: bandwidth; None adapts to each map's sample standard
    deviation (1.0 on a constant map).
    weights: explicit window weights over the context sites (must sum
    to 1); None means uniform.
    context_stride: subsample the map every k-th row/column to form the
    estimation context; 1 uses the whole map.
    """

    sigma: float = None
    weights: np.ndarray = None
    context_stride: int = 1

    def __post_init__(self):
        if self.sigma is not None and self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.context_stride < 1:
            raise ValueError("context_stride must be >= 1")
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=np.float64).ravel()
            if abs(w.sum() - 1.0) >= 1e-9:
                raise ValueError("window weights must sum to 1")
            object.__setattr__(self, "weights", w)


def learn_filter_bank(patches, n_filters, max_iters=200, tol=1e-5, seed=0):
    """Learn an ICA filter bank from RGB patches.

    patches: array-like (N, m, m, 3) or (N, 3m^2), N >= 10 * 3m^2.
    Returns a FilterBank whose filters are the FastICA directions
    composed with the ZCA whitening transform and scaled to unit norm.
    """
    x = np.asarray(patches, dtype=np.float64)
    if x.ndim == 4:
        m = x.shape[1]
        x = x.reshape(len(x), -1)
    else:
        m = int(round(math.sqrt(x.shape[1] / 3)))
    d = x.shape[1]
    if d != 3 * m * m:
        raise ValueError("patches must be m x m x 3")
    if len(x) < 10 * d:
        raise ValueError("need at least 10 * 3m^2 patches")
    if not 1 <= n_filters <= d:
        raise ValueError("n_filters must lie in [1, 3m^2]")

    x = x - x.mean(axis=0)
    cov = (x.T @ x) / len(x)
    evals, evecs = np.linalg.eigh(cov)
    if evals[0] <= 1e-10 * evals[-1]:
        raise ValueError("insufficient patch diversity")
    whitening = (evecs * (1.0 / np.sqrt(evals))) @ evecs.T
    z = x @ whitening.T

    rng = np.random.default_rng(seed)
    w = rng.standard_normal((n_filters, d))
    w = _orthonormalize(w)
    for _ in range(max_iters):
        y = w @ z.T
        g = np.tanh(y)
        g_prime = 1.0 - g * g
        w_new = (g @ z) / len(z) - g_prime.mean(axis=1)[:, None] * w
        w_new = _orthonormalize(w_new)
        delta = float(np.max(np.abs(np.abs(np.einsum("ij,ij->i", w_new, w)) - 1.0)))
        w = w_new
        if delta < tol:
            break
    filters = w @ whitening
    filters /= np.linalg.norm(filters, axis=1, keepdims=True)
    return FilterBank(patch_edge=m, n_filters=n_filters,
                      whitening=whitening, filters=filters)


def _orthonormalize(w):
    """Symmetric decorrelation: W <- (W W^T)^(-1/2) W."""
    s, u = np.linalg.eigh(w @ w.T)
    s = np.maximum(s, 1e-12)
    return (u * (1.0 / np.sqrt(s))) @ u.T @ w


def compute_responses(image, bank):
    """Valid-region correlation of every filter with the image.

    The image's per-channel mean is removed first, so constant images
    respond with exact zeros.  Output shape is
    (n_filters, H - m + 1, W - m + 1).
    """
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError("image must be H x W x 3")
    m = bank.patch_edge
    h, w = img.shape[:2]
    if h < m or w < m:
        raise ValueError("image smaller than the filter patch")
    img = img - img.reshape(-1, 3).mean(axis=0)
    windows = np.lib.stride_tricks.sliding_window_view(img, (m, m, 3))
    cols = windows.reshape((h - m + 1) * (w - m + 1), 3 * m * m)
    maps = cols @ bank.filters.T
    return np.ascontiguousarray(maps.T.reshape(bank.n_filters, h - m + 1, w - m + 1))


def estimate_density(coeffs, config=None):
    """Kernel density of each coefficient against the map's context.

    p(v_jk) = 1/(sigma sqrt(2 pi)) * sum_st w_st exp(-(v_jk - v_st)^2 / (2 sigma^2))
    """
    if config is None:
        config = DensityConfig()
    v = np.asarray(coeffs, dtype=np.float64)
    context = v[::config.context_stride, ::config.context_stride].ravel().copy()
    if config.weights is not None:
        if len(config.weights) != len(context):
            raise ValueError("window weights do not match the context size")
        weights = config.weights
    else:
        weights = np.full(len(context), 1.0 / len(context))
    sigma = config.sigma
    if sigma is None:
        sigma = float(v.std())
        if sigma == 0.0:
            sigma = 1.0
    dens = engine.kernels().kde_density(v.ravel().astype(np.float64), context,
                                        weights.astype(np.float64), float(sigma))
    return dens.reshape(v.shape)


def self_information_map(densities):
    """Joint self-information -sum_i log p_i, assuming independent filters.

    Densities are floored at the smallest positive double before the
    log: a response so extreme that every kernel term underflows would
    otherwise produce an infinite score, and saturation keeps the map
    finite while leaving any normal density untouched.
    """
    d = np.asarray(densities, dtype=np.float64)
    if d.ndim == 2:
        d = d[None, :, :]
    if np.any(d < 0.0):
        raise ValueError("densities must be non-negative")
    return -np.log(np.maximum(d, np.finfo(np.float64).tiny)).sum(axis=0)


def percentile_mask(saliency, percentile=80.0):
    """Binary mask of values strictly above the nearest-rank percentile."""
    v = np.asarray(saliency, dtype=np.float64)
    if v.size == 0:
        raise ValueError("empty saliency map")
    if not 0.0 < percentile < 100.0:
        raise ValueError("percentile must lie in (0, 100)")
    flat = np.sort(v.ravel())
    rank = int(math.ceil(percentile / 100.0 * flat.size))
    threshold = flat[max(rank, 1) - 1]
    return v > threshold


def upsample_to_image(map2d, height, width, patch_edge):
    """Pad a valid-correlation map back to image size.

    The map is placed at the patch anchor offset ((m-1)//2) and the
    borders replicate the nearest computed value.
    """
    v = np.asarray(map2d)
    top = (patch_edge - 1) // 2
    left = (patch_edge - 1) // 2
    bottom = height - v.shape[0] - top
    right = width - v.shape[1] - left
    if bottom < 0 or right < 0:
        raise ValueError("map larger than target size")
    return np.pad(v, ((top, bottom), (left, right)), mode="edge")


def aim_saliency(image, bank, config=None):
    """Full bottom-up pipeline: responses -> densities -> self-information.

    Returns the information map upsampled to the image's size.
    """
    maps = compute_responses(image, bank)
    dens = np.stack([estimate_density(m, config) for m in maps])
    info = self_information_map(dens)
    h, w = np.asarray(image).shape[:2]
    return upsample_to_image(info, h, w, bank.patch_edge)


def sample_patches(image, patch_edge, count, rng):
    """Draw ``count`` random m x m x 3 patches from one RGB image."""
    img = np.asarray(image, dtype=np.float64)
    h, w = img.shape[:2]
    m = patch_edge
    if h < m or w < m:
        raise ValueError("image smaller than the patch size")
    rows = rng.integers(0, h - m + 1, size=count)
    cols = rng.integers(0, w - m + 1, size=count)
    return np.stack([img[r:r + m, c:c + m, :] for r, c in zip(rows, cols)])
