"""2D Gaussian fitting harness: rendering, gradients, and experiments."""

from .backend import BACKEND
from .experiment import (
    EXPERIMENT_LEVELS,
    ExperimentReport,
    allocation_gaussians,
    fit_gaussians,
    gradient_score_pyramid,
    init_level_gaussians,
    run_strategy_experiment,
    strategy_pyramid,
    synthetic_target,
)
from .model import (
    DensificationTarget,
    FitConfig,
    Gaussian2D,
    HomodirGradient,
    bake_score_map,
    densification_targets,
    homodir_gradients,
    pack_params,
    render,
    score_loss,
    unpack_params,
)

__all__ = [
    "BACKEND",
    "EXPERIMENT_LEVELS",
    "DensificationTarget",
    "ExperimentReport",
    "FitConfig",
    "Gaussian2D",
    "HomodirGradient",
    "allocation_gaussians",
    "bake_score_map",
    "densification_targets",
    "fit_gaussians",
    "gradient_score_pyramid",
    "homodir_gradients",
    "init_level_gaussians",
    "pack_params",
    "render",
    "run_strategy_experiment",
    "score_loss",
    "strategy_pyramid",
    "synthetic_target",
    "unpack_params",
]
