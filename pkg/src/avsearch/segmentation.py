"""Foreground/background template segmentation with a 2-component GMM.

A target snapshot usually shows the object against whatever happened to
be behind it.  Fitting a two-component Gaussian mixture over per-pixel
RGB separates the two populations; the component whose mean is farther
from the image-border mean color is taken as the foreground (the border
is almost always background).
"""

import math
from dataclasses import dataclass

import numpy as np

COV_FLOOR = 1e-2  # diagonal added to every covariance, keeps them invertible


@dataclass(frozen=True)
class TargetTemplate:
    rgb: np.ndarray
    mask: np.ndarray
    ll_history: tuple = ()

    def __post_init__(self):
        if self.rgb.shape[:2] != self.mask.shape:
            raise ValueError("mask and image dimensions differ")
        if not self.mask.any():
            raise ValueError("template needs at least one foreground pixel")


def _log_gauss(x, mean, cov):
    """Log density of a 3D Gaussian at each row of x."""
    diff = x - mean
    inv = np.linalg.inv(cov)
    sign, logdet = np.linalg.slogdet(cov)
    maha = np.einsum("ni,ij,nj->n", diff, inv, diff)
    return -0.5 * (maha + logdet + 3.0 * math.log(2.0 * math.pi))


def segment_template(image, max_iters=100, tol=1e-6):
    """EM fit of a 2-component RGB mixture; returns the template.

    The per-iteration log-likelihood is recorded on the result.  A
    fixed diagonal floor regularizes the covariances, so flat-colored
    components cannot degenerate.
    """
    img = np.asarray(image)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError("image must be H x W x 3")
    h, w = img.shape[:2]
    if h < 16 or w < 16:
        raise ValueError("template image must be at least 16 x 16")
    x = img.reshape(-1, 3).astype(np.float64)
    if np.all(x == x[0]):
        raise ValueError("unimodal image")

    border = np.concatenate([img[0, :], img[-1, :], img[1:-1, 0], img[1:-1, -1]])
    border_mean = border.reshape(-1, 3).astype(np.float64).mean(axis=0)
    far = int(np.argmax(((x - border_mean) ** 2).sum(axis=1)))
    means = np.stack([border_mean, x[far]])
    base_cov = np.cov(x.T) + COV_FLOOR * np.eye(3)
    covs = np.stack([base_cov, base_cov])
    weights = np.array([0.5, 0.5])

    n = len(x)
    ll_history = []
    resp = np.zeros((n, 2))
    for _ in range(max_iters):
        logp = np.stack([np.log(max(weights[k], 1e-300)) + _log_gauss(x, means[k], covs[k])
                         for k in range(2)], axis=1)
        mx = logp.max(axis=1, keepdims=True)
        lse = mx[:, 0] + np.log(np.exp(logp - mx).sum(axis=1))
        ll = float(lse.sum())
        resp = np.exp(logp - lse[:, None])
        ll_history.append(ll)
        if len(ll_history) > 1 and ll - ll_history[-2] < tol:
            break
        nk = resp.sum(axis=0)
        nk = np.maximum(nk, 1e-12)
        weights = nk / n
        for k in range(2):
            means[k] = resp[:, k] @ x / nk[k]
            diff = x - means[k]
            covs[k] = (diff * resp[:, k, None]).T @ diff / nk[k] + COV_FLOOR * np.eye(3)

    fg = int(np.argmax(((means - border_mean) ** 2).sum(axis=1)))
    mask = (resp[:, fg] > resp[:, 1 - fg]).reshape(h, w)
    if not mask.any():
        raise ValueError("unimodal image")
    rgb = img.astype(np.uint8) if img.dtype != np.uint8 else img
    return TargetTemplate(rgb=rgb, mask=mask, ll_history=tuple(ll_history))
