"""splatalloc: budgeted multi-level Gaussian allocation from score pyramids.

Scores live on a coarse-to-fine grid pyramid; thresholding them yields
exclusive per-level allocation masks, and a precomputed lookup table turns
any Gaussian budget into the matching threshold with one binary search.
A small 2D fitting harness generates gradient-derived scores and compares
allocation strategies end to end.
"""

from .budget import (
    BudgetQuery,
    ThresholdBudgetTable,
    build_table,
    load_table,
    match_budget,
    oracle_counts,
    save_table,
    save_table_json,
)
from .cameras import (
    GaussianCenterSet,
    Pose,
    SimilarityTransform,
    align_target,
    estimate_alignment,
    scene_scale_loss,
    transfer_focal,
)
from .errors import (
    BudgetAboveMaximumError,
    BudgetBelowMinimumError,
    BudgetRangeError,
    DegenerateBaselineError,
)
from .grids import (
    LevelGrid,
    ScorePyramid,
    StrategyKind,
    load_pyramid,
    save_pyramid,
    sobel_frequency_pyramid,
    sum_pool_2x2,
    uniform_random_pyramid,
    upsample_nn,
)
from .masks import (
    AllocationMaskSet,
    GaussianPlacement,
    compute_masks,
    count_gaussians,
    enumerate_placements,
    per_level_counts,
    save_masks,
)

__version__ = "0.1.0"

__all__ = [
    "AllocationMaskSet",
    "BudgetAboveMaximumError",
    "BudgetBelowMinimumError",
    "BudgetQuery",
    "BudgetRangeError",
    "DegenerateBaselineError",
    "GaussianCenterSet",
    "GaussianPlacement",
    "LevelGrid",
    "Pose",
    "ScorePyramid",
    "SimilarityTransform",
    "StrategyKind",
    "ThresholdBudgetTable",
    "align_target",
    "build_table",
    "compute_masks",
    "count_gaussians",
    "enumerate_placements",
    "estimate_alignment",
    "load_pyramid",
    "load_table",
    "match_budget",
    "oracle_counts",
    "per_level_counts",
    "save_masks",
    "save_pyramid",
    "save_table",
    "save_table_json",
    "scene_scale_loss",
    "sobel_frequency_pyramid",
    "sum_pool_2x2",
    "transfer_focal",
    "uniform_random_pyramid",
    "upsample_nn",
    "__version__",
]
