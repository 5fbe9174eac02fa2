"""Allocation-strategy experiments on the 2D fitting harness.

The pipeline mirrors the intended use of the score pyramid end to end: fit a
coarse model, derive refinement scores, match a Gaussian budget, allocate
cells across levels, then fit the allocated model and report its error.
Everything is deterministic given the config seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..budget import BudgetQuery, build_table, match_budget
from ..grids import (
    ScorePyramid,
    StrategyKind,
    sobel_frequency_pyramid,
    uniform_random_pyramid,
)
from ..masks import AllocationMaskSet, compute_masks, per_level_counts
from .backend import gradient_kernel, render_kernel
from .model import (
    FitConfig,
    Gaussian2D,
    bake_score_map,
    densification_targets,
    homodir_gradients,
    pack_params,
    unpack_params,
)

EXPERIMENT_LEVELS = 3
SIGMA_FACTOR = 0.6


@dataclass(frozen=True)
class ExperimentReport:
    """Outcome of one strategy run, serializable for the CLI."""

    strategy: str
    budget_fraction: float
    seed: int
    achieved_count: int
    tau: float
    final_mse: float
    per_level_counts: tuple[int, ...]

    def to_json(self) -> dict:
        return {
            "strategy": self.strategy,
            "budget_fraction": self.budget_fraction,
            "seed": self.seed,
            "achieved_count": self.achieved_count,
            "tau": self.tau,
            "final_mse": self.final_mse,
            "per_level_counts": list(self.per_level_counts),
        }


def _block_means(image: np.ndarray, grid_h: int, grid_w: int) -> np.ndarray:
    h, w = image.shape
    return image.reshape(grid_h, h // grid_h, grid_w, w // grid_w).mean(axis=(1, 3))


def _cell_gaussian(row, col, cell_h, cell_w, sigma, mean) -> Gaussian2D:
    # Amplitude matches the cell's mass to the Gaussian's total integral.
    amplitude = mean * cell_h * cell_w / (2.0 * math.pi * sigma * sigma)
    center = ((col + 0.5) * cell_w, (row + 0.5) * cell_h)
    return Gaussian2D(center=center, sigma=sigma, amplitude=amplitude)


def init_level_gaussians(
    target: np.ndarray, grid_height: int, grid_width: int
) -> list[Gaussian2D]:
    """One Gaussian per grid cell, centered, sized to the cell."""
    h, w = target.shape
    if h % grid_height or w % grid_width:
        raise ValueError(
            f"{grid_height}x{grid_width} grid does not tile a {h}x{w} image"
        )
    cell_h = h // grid_height
    cell_w = w // grid_width
    sigma = SIGMA_FACTOR * cell_w
    means = _block_means(target, grid_height, grid_width)
    return [
        _cell_gaussian(r, c, cell_h, cell_w, sigma, means[r, c])
        for r in range(grid_height)
        for c in range(grid_width)
    ]


def fit_gaussians(
    gaussians, target: np.ndarray, config: FitConfig
) -> tuple[list[Gaussian2D], list[float]]:
    """Plain fixed-step gradient descent on centers and amplitudes.

    Sigmas stay fixed.  Returns the fitted Gaussians and the MSE history,
    entry 0 before any update and entry i after i updates.
    """
    target = np.asarray(target, dtype=np.float64)
    height, width = target.shape
    params = pack_params(gaussians)
    scale = 2.0 / target.size
    step = config.learning_rate
    history = []
    for _ in range(config.iterations):
        rendered = render_kernel(params, height, width, config.support_cutoff)
        residual = rendered - target
        history.append(float(np.mean(residual * residual)))
        stats = gradient_kernel(params, residual, config.support_cutoff)
        params[:, 0] -= step * scale * stats[:, 0]
        params[:, 1] -= step * scale * stats[:, 1]
        params[:, 3] -= step * scale * stats[:, 2]
    residual = render_kernel(params, height, width, config.support_cutoff) - target
    history.append(float(np.mean(residual * residual)))
    return unpack_params(params), history


def gradient_score_pyramid(
    target: np.ndarray, num_levels: int, config: FitConfig
) -> ScorePyramid:
    """Refit at each scored level and bake the densification targets.

    Level l gets its own grid-initialized fit against the full-resolution
    target, so every level's scores reflect that level's own residual.
    """
    target = np.asarray(target, dtype=np.float64)
    h, w = target.shape
    grids = []
    for level in range(1, num_levels):
        shrink = 2 ** (num_levels - level)
        if h % shrink or w % shrink:
            raise ValueError(
                f"image {h}x{w} does not support {num_levels} levels"
            )
        grid_h, grid_w = h // shrink, w // shrink
        fitted, _ = fit_gaussians(
            init_level_gaussians(target, grid_h, grid_w), target, config
        )
        grads = homodir_gradients(
            fitted, target, support_cutoff=config.support_cutoff
        )
        grids.append(bake_score_map(grid_h, grid_w, densification_targets(grads)))
    return ScorePyramid(num_views=1, num_levels=num_levels, grids=(tuple(grids),))


def allocation_gaussians(
    target: np.ndarray, masks: AllocationMaskSet
) -> list[Gaussian2D]:
    """Instantiate one Gaussian per allocated cell, sized by its level."""
    target = np.asarray(target, dtype=np.float64)
    h, w = target.shape
    out = []
    for level in range(1, masks.num_levels + 1):
        mask = masks.mask(0, level)
        grid_h, grid_w = mask.shape
        if h % grid_h or w % grid_w:
            raise ValueError(
                f"level {level} grid {grid_h}x{grid_w} does not tile {h}x{w}"
            )
        cell_h = h // grid_h
        cell_w = w // grid_w
        sigma = SIGMA_FACTOR * cell_w
        means = _block_means(target, grid_h, grid_w)
        for r, c in np.argwhere(mask == 1):
            out.append(_cell_gaussian(r, c, cell_h, cell_w, sigma, means[r, c]))
    return out


def strategy_pyramid(
    target: np.ndarray, strategy: StrategyKind, num_levels: int, config: FitConfig
) -> ScorePyramid:
    if strategy is StrategyKind.GRADIENT_SCORE:
        return gradient_score_pyramid(target, num_levels, config)
    if strategy is StrategyKind.UNIFORM_RANDOM:
        h, w = target.shape
        shrink = 2 ** (num_levels - 1)
        return uniform_random_pyramid(
            1, num_levels, h // shrink, w // shrink, config.seed
        )
    if strategy is StrategyKind.SOBEL_FREQUENCY:
        return sobel_frequency_pyramid(target, num_levels)
    raise ValueError(f"unknown strategy {strategy!r}")


def run_strategy_experiment(
    target_image: np.ndarray,
    budget_fraction: float,
    strategy: StrategyKind,
    config: FitConfig,
) -> ExperimentReport:
    """Score, allocate under the budget, fit, and report the final MSE."""
    target = np.asarray(target_image, dtype=np.float64)
    if target.ndim != 2:
        raise ValueError("target image must be 2-D")
    if not 0.0 < budget_fraction <= 1.0:
        raise ValueError(f"budget fraction must be in (0, 1], got {budget_fraction}")
    pyramid = strategy_pyramid(target, strategy, EXPERIMENT_LEVELS, config)
    budget = int(math.floor(budget_fraction * pyramid.max_count))
    table = build_table(pyramid)
    tau, achieved = match_budget(table, BudgetQuery(target=budget))
    masks = compute_masks(pyramid, tau)
    gaussians = allocation_gaussians(target, masks)
    _, history = fit_gaussians(gaussians, target, config)
    return ExperimentReport(
        strategy=strategy.value,
        budget_fraction=float(budget_fraction),
        seed=config.seed,
        achieved_count=achieved,
        tau=tau,
        final_mse=history[-1],
        per_level_counts=tuple(per_level_counts(masks)),
    )


def synthetic_target(seed: int, height: int = 32, width: int = 32) -> np.ndarray:
    """Seeded test image: a smooth ramp with one offset textured patch.

    The patch's interior texture and contrast border concentrate fitting
    error, giving the allocation strategies something to disagree about.
    """
    rng = np.random.default_rng(seed)
    ys = np.linspace(0.0, 1.0, height)[:, None]
    xs = np.linspace(0.0, 1.0, width)[None, :]
    image = 0.25 + 0.2 * (0.5 * (xs + ys))
    patch_h, patch_w = height // 2, width // 2
    top = int(rng.integers(0, height - patch_h + 1))
    left = int(rng.integers(0, width - patch_w + 1))
    fy, fx = rng.uniform(2.0, 5.0, size=2)
    phase_y, phase_x = rng.uniform(0.0, 2.0 * math.pi, size=2)
    py = np.linspace(0.0, 1.0, patch_h)[:, None]
    px = np.linspace(0.0, 1.0, patch_w)[None, :]
    texture = 0.22 * np.sin(2.0 * math.pi * fy * py + phase_y) * np.sin(
        2.0 * math.pi * fx * px + phase_x
    )
    image[top : top + patch_h, left : left + patch_w] += 0.18 + texture
    return np.clip(image, 0.0, 1.0)
