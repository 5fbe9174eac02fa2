"""Multi-resolution score grids and the heuristic score generators.

Conventions used throughout the package:

* Grids are row-major 2-D float64 arrays indexed ``[row][col]``.
* Pyramid levels are 1-based in every public signature: level 1 is the
  coarsest, level ``L`` the finest, and the spatial resolution doubles from
  one level to the next.  Score grids exist for levels ``1 .. L-1`` only;
  level ``L`` carries no score map because it is the forced fallback level.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LevelGrid:
    """A single score map at one pyramid level.

    Wraps an immutable ``(height, width)`` float64 array. All values must be
    finite and the grid must be non-empty.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64, order="C", copy=True)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("grid must be a non-empty 2-D array")
        if not np.all(np.isfinite(arr)):
            raise ValueError("grid values must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    def __eq__(self, other):
        if not isinstance(other, LevelGrid):
            return NotImplemented
        return self.data.shape == other.data.shape and bool(
            np.array_equal(self.data, other.data)
        )


class StrategyKind(enum.Enum):
    """Score-generation strategy for allocation experiments."""

    GRADIENT_SCORE = "gradient"
    UNIFORM_RANDOM = "random"
    SOBEL_FREQUENCY = "sobel"


@dataclass(frozen=True)
class ScorePyramid:
    """Per-view score maps for levels ``1 .. num_levels - 1``.

    ``grids[i][l - 1]`` holds view ``i``'s map for level ``l``.  Every view
    shares the same per-level dimensions and each level doubles the height
    and width of the previous one.
    """

    num_views: int
    num_levels: int
    grids: tuple[tuple[LevelGrid, ...], ...]

    def __post_init__(self):
        if self.num_views < 1:
            raise ValueError("num_views must be positive")
        if self.num_levels < 2:
            raise ValueError("num_levels must be at least 2")
        grids = tuple(tuple(view) for view in self.grids)
        if len(grids) != self.num_views:
            raise ValueError("one grid list per view required")
        for view in grids:
            if len(view) != self.num_levels - 1:
                raise ValueError("score maps must cover levels 1..L-1")
            for coarse, fine in zip(view, view[1:]):
                if (fine.height, fine.width) != (2 * coarse.height, 2 * coarse.width):
                    raise ValueError("level dimensions must double at each step")
        first = grids[0]
        for view in grids[1:]:
            for a, b in zip(first, view):
                if (a.height, a.width) != (b.height, b.width):
                    raise ValueError("all views must share per-level dimensions")
        object.__setattr__(self, "grids", grids)

    def grid(self, view: int, level: int) -> LevelGrid:
        """Score map of ``view`` at 1-based ``level`` (1 <= level <= L-1)."""
        if not 1 <= level <= self.num_levels - 1:
            raise ValueError(f"level {level} has no score map")
        return self.grids[view][level - 1]

    def level_shape(self, level: int) -> tuple[int, int]:
        """(height, width) of 1-based ``level``, including the finest level L."""
        if not 1 <= level <= self.num_levels:
            raise ValueError(f"level {level} out of range")
        if level == self.num_levels:
            last = self.grids[0][-1]
            return 2 * last.height, 2 * last.width
        g = self.grids[0][level - 1]
        return g.height, g.width

    @property
    def base_count(self) -> int:
        """Gaussian count when every region stays at the coarsest level."""
        h, w = self.level_shape(1)
        return self.num_views * h * w

    @property
    def max_count(self) -> int:
        """Gaussian count when every region refines to the finest level."""
        h, w = self.level_shape(self.num_levels)
        return self.num_views * h * w


def upsample_nn(grid: LevelGrid, factor: int) -> LevelGrid:
    """Nearest-neighbor upsampling by a power-of-two factor.

    ``out[y][x] == grid[y // factor][x // factor]``.
    """
    if factor < 1 or (factor & (factor - 1)) != 0:
        raise ValueError(f"factor must be a positive power of two, got {factor}")
    if factor == 1:
        return grid
    return LevelGrid(grid.data.repeat(factor, axis=0).repeat(factor, axis=1))


def sum_pool_2x2(grid: LevelGrid) -> LevelGrid:
    """Halve both dimensions, each output cell the sum of its 2x2 block."""
    h, w = grid.height, grid.width
    if h % 2 or w % 2:
        raise ValueError(f"dimensions must be even, got {h}x{w}")
    pooled = grid.data.reshape(h // 2, 2, w // 2, 2).sum(axis=(1, 3))
    return LevelGrid(pooled)


def _require_pyramid_dims(height: int, width: int, num_levels: int) -> tuple[int, int]:
    """Coarsest-level dims for an image of the given size, or raise."""
    if num_levels < 2:
        raise ValueError("num_levels must be at least 2")
    factor = 2 ** (num_levels - 1)
    if height % factor or width % factor or height < factor or width < factor:
        raise ValueError(
            f"{height}x{width} image cannot host {num_levels} halving levels"
        )
    return height // factor, width // factor


def _block_mean(image: np.ndarray, factor: int) -> np.ndarray:
    h, w = image.shape
    return image.reshape(h // factor, factor, w // factor, factor).mean(axis=(1, 3))


def _sobel_magnitude(image: np.ndarray) -> np.ndarray:
    """3x3 Sobel gradient magnitude with replicate border handling."""
    p = np.pad(image, 1, mode="edge")
    # difference opposite taps first so featureless regions cancel exactly
    gx = (
        (p[:-2, 2:] - p[:-2, :-2])
        + 2.0 * (p[1:-1, 2:] - p[1:-1, :-2])
        + (p[2:, 2:] - p[2:, :-2])
    )
    gy = (
        (p[2:, :-2] - p[:-2, :-2])
        + 2.0 * (p[2:, 1:-1] - p[:-2, 1:-1])
        + (p[2:, 2:] - p[:-2, 2:])
    )
    return np.hypot(gx, gy)


def sobel_frequency_pyramid(image: np.ndarray, num_levels: int) -> ScorePyramid:
    """Edge-emphasis heuristic scores: per level, resize the image by area
    averaging, take the Sobel gradient magnitude, and normalize to [0, 1] by
    the level maximum (all zeros when the level is featureless).

    Single-view: the returned pyramid has ``num_views == 1``.
    """
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2:
        raise ValueError("expected a 2-D grayscale image")
    _require_pyramid_dims(image.shape[0], image.shape[1], num_levels)
    levels = []
    for level in range(1, num_levels):
        factor = 2 ** (num_levels - level)
        resized = _block_mean(image, factor)
        mag = _sobel_magnitude(resized)
        peak = mag.max()
        if peak > 0.0:
            mag = mag / peak
        else:
            mag = np.zeros_like(mag)
        levels.append(LevelGrid(mag))
    return ScorePyramid(num_views=1, num_levels=num_levels, grids=(tuple(levels),))


def uniform_random_pyramid(
    num_views: int,
    num_levels: int,
    coarse_height: int,
    coarse_width: int,
    seed: int,
) -> ScorePyramid:
    """I.i.d. uniform [0, 1) scores from a seeded generator.

    Deterministic: the same seed always yields the bitwise-identical pyramid.
    Draws are made per view, then per level coarse-to-fine.
    """
    if coarse_height < 1 or coarse_width < 1:
        raise ValueError("coarse dimensions must be positive")
    rng = np.random.default_rng(seed)
    grids = []
    for _ in range(num_views):
        view = []
        for level in range(1, num_levels):
            scale = 2 ** (level - 1)
            view.append(LevelGrid(rng.random((coarse_height * scale, coarse_width * scale))))
        grids.append(tuple(view))
    return ScorePyramid(num_views=num_views, num_levels=num_levels, grids=tuple(grids))


def pyramid_from_image_dims(
    height: int, width: int, num_levels: int
) -> tuple[int, int]:
    """Coarsest-level (height, width) implied by an image of the given size."""
    return _require_pyramid_dims(height, width, num_levels)


def pyramid_to_json(pyramid: ScorePyramid) -> dict:
    return {
        "num_views": pyramid.num_views,
        "num_levels": pyramid.num_levels,
        "grids": [
            [
                {"h": g.height, "w": g.width, "values": g.data.ravel().tolist()}
                for g in view
            ]
            for view in pyramid.grids
        ],
    }


def pyramid_from_json(obj: dict) -> ScorePyramid:
    grids = tuple(
        tuple(
            LevelGrid(np.asarray(g["values"], dtype=np.float64).reshape(g["h"], g["w"]))
            for g in view
        )
        for view in obj["grids"]
    )
    return ScorePyramid(
        num_views=int(obj["num_views"]),
        num_levels=int(obj["num_levels"]),
        grids=grids,
    )


def save_pyramid(pyramid: ScorePyramid, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        json.dump(pyramid_to_json(pyramid), fh)
        fh.write("\n")


def load_pyramid(path) -> ScorePyramid:
    with open(path, "r", encoding="ascii") as fh:
        return pyramid_from_json(json.load(fh))
