"""Exclusive multi-level allocation masks derived from score pyramids.

A threshold ``tau`` splits every view into per-level binary masks: a cell is
finalized at the coarsest level whose score falls below ``tau`` (strictly),
and any region never finalized lands on the forced finest level.  The masks
partition space: upsampled to the finest resolution they sum to exactly one
everywhere.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .grids import ScorePyramid
from .pgm import write_pgm


@dataclass(frozen=True)
class AllocationMaskSet:
    """Binary masks per view for levels ``1 .. num_levels``.

    ``masks[i][l - 1]`` is view ``i``'s uint8 mask for level ``l``; unlike
    the score pyramid, the finest level is included.
    """

    num_views: int
    num_levels: int
    masks: tuple[tuple[np.ndarray, ...], ...]

    def __post_init__(self):
        masks = []
        if len(self.masks) != self.num_views:
            raise ValueError("one mask list per view required")
        for view in self.masks:
            if len(view) != self.num_levels:
                raise ValueError("masks must cover levels 1..L")
            out = []
            for level, arr in enumerate(view, start=1):
                arr = np.array(arr, dtype=np.uint8, order="C", copy=True)
                if arr.ndim != 2:
                    raise ValueError("masks must be 2-D")
                if arr.max(initial=0) > 1:
                    raise ValueError("mask values must be 0 or 1")
                if level > 1 and arr.shape != tuple(2 * s for s in out[-1].shape):
                    raise ValueError("mask dimensions must double at each level")
                arr.flags.writeable = False
                out.append(arr)
            masks.append(tuple(out))
        first = masks[0]
        for view in masks[1:]:
            for a, b in zip(first, view):
                if a.shape != b.shape:
                    raise ValueError("all views must share per-level dimensions")
        object.__setattr__(self, "masks", tuple(masks))

    def mask(self, view: int, level: int) -> np.ndarray:
        """Mask of ``view`` at 1-based ``level`` (finest level included)."""
        if not 1 <= level <= self.num_levels:
            raise ValueError(f"level {level} out of range")
        return self.masks[view][level - 1]


@dataclass(frozen=True, order=True)
class GaussianPlacement:
    """One allocated cell: ``(view, level, row, col)``, level 1-based."""

    view: int
    level: int
    row: int
    col: int


def compute_masks(pyramid: ScorePyramid, tau: float) -> AllocationMaskSet:
    """Evaluate the exclusive level-selection recursion at threshold ``tau``.

    A cell is kept at level 1 when its score is strictly below ``tau``; at
    intermediate levels additionally only where no coarser level already
    allocated; the finest level takes everything left.  ``tau`` may be
    ``+inf`` (all coarse) or ``-inf`` (all fine); NaN is rejected.
    """
    tau = float(tau)
    if math.isnan(tau):
        raise ValueError("tau must be a real number or +/-inf")
    num_levels = pyramid.num_levels
    views = []
    for i in range(pyramid.num_views):
        level_masks = []
        covered = None  # union of coarser allocations, at the current level's dims
        for level in range(1, num_levels):
            below = pyramid.grid(i, level).data < tau
            if covered is None:
                m = below
            else:
                m = below & ~covered
            level_masks.append(m.astype(np.uint8))
            union = m if covered is None else (covered | m)
            covered = union.repeat(2, axis=0).repeat(2, axis=1)
        level_masks.append((~covered).astype(np.uint8))
        views.append(tuple(level_masks))
    return AllocationMaskSet(
        num_views=pyramid.num_views, num_levels=num_levels, masks=tuple(views)
    )


def count_gaussians(masks: AllocationMaskSet) -> int:
    """Total allocated cells over all views and levels."""
    return int(
        sum(int(arr.sum(dtype=np.int64)) for view in masks.masks for arr in view)
    )


def per_level_counts(masks: AllocationMaskSet) -> list[int]:
    """Allocated cells per level (summed over views), index 0 = level 1."""
    totals = [0] * masks.num_levels
    for view in masks.masks:
        for idx, arr in enumerate(view):
            totals[idx] += int(arr.sum(dtype=np.int64))
    return totals


def enumerate_placements(masks: AllocationMaskSet) -> list[GaussianPlacement]:
    """All allocated cells, ordered by (view, level, row, col) ascending."""
    out = []
    for i, view in enumerate(masks.masks):
        for level, arr in enumerate(view, start=1):
            for row, col in np.argwhere(arr):
                out.append(GaussianPlacement(i, level, int(row), int(col)))
    return out


def save_masks(masks: AllocationMaskSet, tau: float, out_dir) -> None:
    """Write one 0/255 P5 PGM per (view, level) plus a JSON manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for i, view in enumerate(masks.masks):
        for level, arr in enumerate(view, start=1):
            write_pgm(out / f"mask_v{i}_l{level}.pgm", arr * np.uint8(255))
    manifest = {
        "tau": tau,
        "counts_per_level": per_level_counts(masks),
        "total": count_gaussians(masks),
    }
    with open(out / "manifest.json", "w", encoding="ascii") as fh:
        json.dump(manifest, fh)
        fh.write("\n")


def placements_to_csv(placements: list[GaussianPlacement], path) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(["view", "level", "row", "col"])
        for p in placements:
            writer.writerow([p.view, p.level, p.row, p.col])
