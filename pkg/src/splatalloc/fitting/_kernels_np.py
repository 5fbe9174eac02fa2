"""Vectorized numpy implementations of the per-Gaussian raster kernels.

Reference semantics for the compiled extension: both backends must agree on
the truncated support set exactly, so the window bounds and the inclusion
test are written the same way here and in the .pyx source.

Parameter rows are (mu_x, mu_y, sigma, amplitude); pixel (row, col) has
center (col + 0.5, row + 0.5).  Gradient sums are raw, without the 2/P
mean-squared-error factor, which the caller applies.
"""

from __future__ import annotations

import math

import numpy as np


def _window(mu_x, mu_y, radius, height, width):
    """Inclusive row/col bounds of pixels whose centers may fall inside
    the support disc, or None when the disc misses the image."""
    r_lo = max(0, math.ceil(mu_y - radius - 0.5))
    r_hi = min(height - 1, math.floor(mu_y + radius - 0.5))
    c_lo = max(0, math.ceil(mu_x - radius - 0.5))
    c_hi = min(width - 1, math.floor(mu_x + radius - 0.5))
    if r_lo > r_hi or c_lo > c_hi:
        return None
    return r_lo, r_hi, c_lo, c_hi


def render(params: np.ndarray, height: int, width: int, cutoff: float) -> np.ndarray:
    """Sum of truncated isotropic Gaussians evaluated at pixel centers."""
    params = np.asarray(params, dtype=np.float64)
    image = np.zeros((height, width), dtype=np.float64)
    for mu_x, mu_y, sigma, amp in params:
        radius = cutoff * sigma
        bounds = _window(mu_x, mu_y, radius, height, width)
        if bounds is None:
            continue
        r_lo, r_hi, c_lo, c_hi = bounds
        dy = np.arange(r_lo, r_hi + 1, dtype=np.float64) + 0.5 - mu_y
        dx = np.arange(c_lo, c_hi + 1, dtype=np.float64) + 0.5 - mu_x
        sq = dx[None, :] ** 2 + dy[:, None] ** 2
        inside = sq <= radius * radius
        inv_var = 1.0 / (sigma * sigma)
        values = amp * np.exp(-0.5 * sq * inv_var)
        image[r_lo : r_hi + 1, c_lo : c_hi + 1] += np.where(inside, values, 0.0)
    return image


def gradient_stats(
    params: np.ndarray, residual: np.ndarray, cutoff: float
) -> np.ndarray:
    """Per-Gaussian raw loss-gradient sums over the truncated support.

    Returns an (n, 6) array of
    (sum gx, sum gy, sum ga, sum |gx|, sum |gy|, pixel count)
    where gx = residual * amp * e * (x - mu_x) / sigma^2 is the per-pixel
    center gradient before the 2/P factor and ga = residual * e is the
    amplitude gradient before the same factor.
    """
    params = np.asarray(params, dtype=np.float64)
    residual = np.asarray(residual, dtype=np.float64)
    height, width = residual.shape
    out = np.zeros((params.shape[0], 6), dtype=np.float64)
    for i, (mu_x, mu_y, sigma, amp) in enumerate(params):
        radius = cutoff * sigma
        bounds = _window(mu_x, mu_y, radius, height, width)
        if bounds is None:
            continue
        r_lo, r_hi, c_lo, c_hi = bounds
        dy = np.arange(r_lo, r_hi + 1, dtype=np.float64) + 0.5 - mu_y
        dx = np.arange(c_lo, c_hi + 1, dtype=np.float64) + 0.5 - mu_x
        sq = dx[None, :] ** 2 + dy[:, None] ** 2
        inside = sq <= radius * radius
        inv_var = 1.0 / (sigma * sigma)
        weight = residual[r_lo : r_hi + 1, c_lo : c_hi + 1] * np.exp(-0.5 * sq * inv_var)
        gx = np.where(inside, weight * amp * dx[None, :] * inv_var, 0.0)
        gy = np.where(inside, weight * amp * dy[:, None] * inv_var, 0.0)
        ga = np.where(inside, weight, 0.0)
        out[i, 0] = gx.sum()
        out[i, 1] = gy.sum()
        out[i, 2] = ga.sum()
        out[i, 3] = np.abs(gx).sum()
        out[i, 4] = np.abs(gy).sum()
        out[i, 5] = np.count_nonzero(inside)
    return out
