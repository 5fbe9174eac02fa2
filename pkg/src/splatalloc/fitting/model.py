"""Additive 2D Gaussian image model and its densification signal.

The image is a plain sum of truncated isotropic Gaussians and the loss is
per-pixel mean squared error, so every gradient below is analytic.  Each
Gaussian's refinement signal is the homodirectional gradient: per-axis sums
of absolute per-pixel loss derivatives with respect to its center, taken
over exactly the pixels in its truncated support.  Absolute values keep
mirror-symmetric residuals from cancelling to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..grids import LevelGrid
from .backend import gradient_kernel, render_kernel

LOG_GAIN = 1e4


@dataclass(frozen=True)
class Gaussian2D:
    """Isotropic Gaussian in pixel coordinates."""

    center: tuple[float, float]
    sigma: float
    amplitude: float

    def __post_init__(self):
        x, y = self.center
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ValueError("center must be finite")
        if not (self.sigma > 0.0 and math.isfinite(self.sigma)):
            raise ValueError(f"sigma must be positive and finite, got {self.sigma}")
        if not math.isfinite(self.amplitude):
            raise ValueError("amplitude must be finite")
        object.__setattr__(self, "center", (float(x), float(y)))


@dataclass(frozen=True)
class HomodirGradient:
    """Per-axis sums of absolute center derivatives and the support size."""

    gx_abs_sum: float
    gy_abs_sum: float
    pixels_touched: int

    def __post_init__(self):
        if self.gx_abs_sum < 0.0 or self.gy_abs_sum < 0.0:
            raise ValueError("absolute gradient sums must be nonnegative")
        if self.pixels_touched < 0:
            raise ValueError("pixel count must be nonnegative")

    @property
    def norm(self) -> float:
        return math.hypot(self.gx_abs_sum, self.gy_abs_sum)


@dataclass(frozen=True)
class DensificationTarget:
    """Log-compressed gradient magnitude used as a refinement score."""

    value: float

    def __post_init__(self):
        if not (self.value >= 0.0):
            raise ValueError(f"target must be nonnegative, got {self.value}")


@dataclass(frozen=True)
class FitConfig:
    """Knobs for the fixed-step gradient-descent fit."""

    iterations: int = 150
    learning_rate: float = 20.0
    support_cutoff: float = 3.0
    seed: int = 0

    def __post_init__(self):
        if self.iterations < 0:
            raise ValueError("iterations must be nonnegative")
        if not (self.learning_rate > 0.0):
            raise ValueError("learning rate must be positive")
        if not (self.support_cutoff > 0.0):
            raise ValueError("support cutoff must be positive")


def pack_params(gaussians) -> np.ndarray:
    """Stack Gaussians into the (n, 4) kernel layout
    (mu_x, mu_y, sigma, amplitude)."""
    out = np.empty((len(gaussians), 4), dtype=np.float64)
    for i, g in enumerate(gaussians):
        out[i, 0] = g.center[0]
        out[i, 1] = g.center[1]
        out[i, 2] = g.sigma
        out[i, 3] = g.amplitude
    return out


def unpack_params(params: np.ndarray) -> list[Gaussian2D]:
    return [
        Gaussian2D(center=(row[0], row[1]), sigma=row[2], amplitude=row[3])
        for row in np.asarray(params, dtype=np.float64)
    ]


def render(gaussians, height: int, width: int, *, support_cutoff: float = 3.0):
    """Evaluate the Gaussian sum at pixel centers (col + 0.5, row + 0.5)."""
    if height <= 0 or width <= 0:
        raise ValueError("image dimensions must be positive")
    return render_kernel(pack_params(gaussians), height, width, support_cutoff)


def homodir_gradients(
    gaussians, target_image: np.ndarray, *, support_cutoff: float = 3.0
) -> list[HomodirGradient]:
    """Per-Gaussian homodirectional gradients against a target raster.

    The loss is mean squared error over all pixels; each Gaussian sums the
    absolute per-pixel derivatives over its own truncated support.
    """
    target = np.asarray(target_image, dtype=np.float64)
    if target.ndim != 2:
        raise ValueError(f"target image must be 2-D, got shape {target.shape}")
    height, width = target.shape
    params = pack_params(gaussians)
    rendered = render_kernel(params, height, width, support_cutoff)
    residual = rendered - target
    stats = gradient_kernel(params, residual, support_cutoff)
    scale = 2.0 / target.size
    return [
        HomodirGradient(
            gx_abs_sum=scale * row[3],
            gy_abs_sum=scale * row[4],
            pixels_touched=int(row[5]),
        )
        for row in stats
    ]


def densification_targets(gradients) -> list[DensificationTarget]:
    """d = log(1 + 1e4 * |v|_2) per Gaussian, natural log."""
    return [
        DensificationTarget(value=math.log1p(LOG_GAIN * g.norm)) for g in gradients
    ]


def score_loss(predicted, targets) -> float:
    """Mean absolute error between predicted scores and targets."""
    if len(predicted) != len(targets):
        raise ValueError(
            f"length mismatch: {len(predicted)} predictions, {len(targets)} targets"
        )
    if len(targets) == 0:
        return 0.0
    return float(
        np.mean([abs(float(p) - t.value) for p, t in zip(predicted, targets)])
    )


def bake_score_map(height: int, width: int, targets) -> LevelGrid:
    """Lay per-Gaussian targets back onto their level grid.

    Assumes the grid-initialized layout: one Gaussian per cell, row-major.
    """
    if len(targets) != height * width:
        raise ValueError(
            f"{len(targets)} targets cannot fill a {height}x{width} grid"
        )
    values = np.array([t.value for t in targets], dtype=np.float64)
    return LevelGrid(values.reshape(height, width))
