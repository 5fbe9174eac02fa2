"""Threshold-budget lookup tables and logarithmic budget matching.

The table maps every score cell to the exact Gaussian count produced by
thresholding at that score.  Construction folds per-cell count deltas from
fine to coarse: a cell starts at +3 (refining one cell trades 1 Gaussian for
4), but a cell can only split once every coarser ancestor has split, so its
delta activates at the minimum score along its ancestor chain.  A child
whose score is >= that running ancestor minimum refines in the same instant
as the bottleneck ancestor, so its delta is merged into the parent's row
(and onward, level by level) and zeroed in place.  Sorting scores descending
and prefix-summing the deltas yields counts ascending; a budget query is
then one binary search.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass

import numpy as np

from .errors import BudgetAboveMaximumError, BudgetBelowMinimumError
from .grids import ScorePyramid
from .masks import compute_masks, count_gaussians


@dataclass(frozen=True)
class ThresholdBudgetTable:
    """Paired descending thresholds and ascending Gaussian counts.

    Row k answers: thresholding at ``thresholds[k]`` allocates exactly
    ``counts[k]`` Gaussians.  With duplicate scores only the last row of a
    run carries the realizable count; queries resolve runs to their end.
    """

    thresholds: np.ndarray
    counts: np.ndarray
    base_count: int
    max_count: int

    def __post_init__(self):
        thresholds = np.array(self.thresholds, dtype=np.float64, copy=True)
        counts = np.array(self.counts, dtype=np.int64, copy=True)
        if thresholds.ndim != 1 or thresholds.shape != counts.shape:
            raise ValueError("thresholds and counts must be 1-D and equal length")
        if thresholds.size == 0:
            raise ValueError("table must not be empty")
        if np.any(np.diff(thresholds) > 0):
            raise ValueError("thresholds must be non-increasing")
        if np.any(np.diff(counts) < 0):
            raise ValueError("counts must be non-decreasing")
        if int(counts[-1]) != self.max_count:
            raise ValueError("last count must equal the all-finest count")
        thresholds.flags.writeable = False
        counts.flags.writeable = False
        object.__setattr__(self, "thresholds", thresholds)
        object.__setattr__(self, "counts", counts)

    def __len__(self) -> int:
        return int(self.thresholds.size)


@dataclass(frozen=True)
class BudgetQuery:
    """A target Gaussian count to match from below."""

    target: int

    def __post_init__(self):
        if self.target < 0:
            raise ValueError("target must be nonnegative")


def build_table(pyramid: ScorePyramid) -> ThresholdBudgetTable:
    """Precompute the (threshold, count) lookup for every score cell.

    Flattening order is view-major then level, row, col, and the descending
    sort is stable, so rows with equal scores keep that order.
    """
    score_parts = []
    delta_parts = []
    num_levels = pyramid.num_levels
    for i in range(pyramid.num_views):
        levels = [pyramid.grid(i, l).data for l in range(1, num_levels)]
        deltas = [np.full(d.shape, 3, dtype=np.int64) for d in levels]
        # Minimum score over levels 1..l at level l's resolution; a cell's
        # delta activates at this chain minimum, not at its own score alone,
        # because no cell can split before all of its ancestors have.
        chain_min = [levels[0]]
        for d in levels[1:]:
            up = chain_min[-1].repeat(2, axis=0).repeat(2, axis=1)
            chain_min.append(np.minimum(d, up))
        for l in range(num_levels - 1, 1, -1):
            bottleneck = chain_min[l - 2]
            child = levels[l - 1]
            awake = child >= bottleneck.repeat(2, axis=0).repeat(2, axis=1)
            folded = np.where(awake, deltas[l - 1], 0)
            h, w = folded.shape
            deltas[l - 2] += folded.reshape(h // 2, 2, w // 2, 2).sum(axis=(1, 3))
            deltas[l - 1][awake] = 0
        for d, nd in zip(levels, deltas):
            score_parts.append(d.ravel())
            delta_parts.append(nd.ravel())
    scores = np.concatenate(score_parts)
    all_deltas = np.concatenate(delta_parts)
    order = np.argsort(-scores, kind="stable")
    thresholds = scores[order]
    counts = pyramid.base_count + np.cumsum(all_deltas[order])
    if int(counts[-1]) != pyramid.max_count:
        raise RuntimeError("delta folding lost mass; table is inconsistent")
    return ThresholdBudgetTable(
        thresholds=thresholds,
        counts=counts,
        base_count=pyramid.base_count,
        max_count=pyramid.max_count,
    )


def match_budget(
    table: ThresholdBudgetTable, query: BudgetQuery | int
) -> tuple[float, int]:
    """Largest tabulated count not exceeding the target, by binary search.

    Returns ``(tau, achieved)``.  Targets below the first table entry fall
    back to the all-coarse allocation with ``tau = +inf``.  With duplicate
    scores the answer is resolved to the end of the run so that ``achieved``
    always equals the mask count at the returned ``tau`` (it may then exceed
    the target; the slack bound assumes unique scores).
    """
    target = query.target if isinstance(query, BudgetQuery) else int(query)
    if target < table.base_count:
        raise BudgetBelowMinimumError(
            f"budget {target} below the all-coarse count {table.base_count}",
            target=target, low=table.base_count, high=table.max_count,
        )
    if target > table.max_count:
        raise BudgetAboveMaximumError(
            f"budget {target} above the all-finest count {table.max_count}",
            target=target, low=table.base_count, high=table.max_count,
        )
    k = int(np.searchsorted(table.counts, target, side="right")) - 1
    if k < 0:
        return math.inf, table.base_count
    tau = float(table.thresholds[k])
    ascending = table.thresholds[::-1]
    last = len(table) - 1 - int(np.searchsorted(ascending, tau, side="left"))
    return tau, int(table.counts[last])


def oracle_counts(pyramid: ScorePyramid) -> list[tuple[float, int]]:
    """Brute-force reference: evaluate the mask recursion at every distinct
    score value (and the +inf sentinel) and count directly.

    Slow by design; exists to validate ``build_table`` entry by entry.
    """
    values = np.concatenate(
        [
            pyramid.grid(i, l).data.ravel()
            for i in range(pyramid.num_views)
            for l in range(1, pyramid.num_levels)
        ]
    )
    out = [(math.inf, pyramid.base_count)]
    for d in np.unique(values)[::-1]:
        out.append((float(d), count_gaussians(compute_masks(pyramid, float(d)))))
    return out


def save_table(table: ThresholdBudgetTable, path) -> None:
    """Binary layout: [u64 K][f64 tau x K][u64 count x K][u64 base][u64 max],
    little-endian throughout."""
    k = len(table)
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Q", k))
        fh.write(table.thresholds.astype("<f8").tobytes())
        fh.write(table.counts.astype("<u8").tobytes())
        fh.write(struct.pack("<QQ", table.base_count, table.max_count))


def load_table(path) -> ThresholdBudgetTable:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 8:
        raise ValueError("truncated table file")
    (k,) = struct.unpack_from("<Q", raw, 0)
    expected = 8 + 16 * k + 16
    if len(raw) != expected:
        raise ValueError(f"table file has {len(raw)} bytes, expected {expected}")
    thresholds = np.frombuffer(raw, dtype="<f8", count=k, offset=8)
    counts = np.frombuffer(raw, dtype="<u8", count=k, offset=8 + 8 * k).astype(np.int64)
    base, high = struct.unpack_from("<QQ", raw, 8 + 16 * k)
    return ThresholdBudgetTable(
        thresholds=thresholds, counts=counts, base_count=int(base), max_count=int(high)
    )


def save_table_json(table: ThresholdBudgetTable, path) -> None:
    """Human-inspectable mirror of the binary table."""
    obj = {
        "K": len(table),
        "base_count": table.base_count,
        "max_count": table.max_count,
        "thresholds": table.thresholds.tolist(),
        "counts": table.counts.tolist(),
    }
    with open(path, "w", encoding="ascii") as fh:
        json.dump(obj, fh)
        fh.write("\n")
