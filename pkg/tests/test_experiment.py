import json
import math

import numpy as np
import pytest

from splatalloc.budget import build_table, match_budget
from splatalloc.fitting.experiment import (
    EXPERIMENT_LEVELS,
    SIGMA_FACTOR,
    ExperimentReport,
    allocation_gaussians,
    fit_gaussians,
    gradient_score_pyramid,
    init_level_gaussians,
    run_strategy_experiment,
    strategy_pyramid,
    synthetic_target,
)
from splatalloc.fitting.model import FitConfig, Gaussian2D, render
from splatalloc.grids import StrategyKind
from splatalloc.masks import compute_masks

FAST = FitConfig(iterations=25)


class TestInitLayout:
    def test_grid_centers_sigma_and_amplitude(self):
        target = np.full((32, 32), 0.5)
        gaussians = init_level_gaussians(target, 4, 4)
        assert len(gaussians) == 16
        cell = 8.0
        sigma = SIGMA_FACTOR * cell
        assert gaussians[0].center == (4.0, 4.0)
        assert gaussians[1].center == (12.0, 4.0)  # row-major: col varies first
        assert gaussians[4].center == (4.0, 12.0)
        for g in gaussians:
            assert g.sigma == sigma
            assert g.amplitude == pytest.approx(
                0.5 * cell * cell / (2.0 * math.pi * sigma * sigma), rel=1e-15
            )

    def test_amplitude_tracks_cell_mean(self):
        target = np.zeros((8, 8))
        target[0:4, 4:8] = 1.0
        gaussians = init_level_gaussians(target, 2, 2)
        amps = [g.amplitude for g in gaussians]
        assert amps[0] == 0.0
        assert amps[1] > 0.0
        assert amps[2] == 0.0 and amps[3] == 0.0

    def test_rejects_non_tiling_grid(self):
        with pytest.raises(ValueError):
            init_level_gaussians(np.zeros((10, 10)), 3, 3)


class TestFitGaussians:
    def test_history_length_and_types(self):
        target = synthetic_target(0, 16, 16)
        init = init_level_gaussians(target, 4, 4)
        fitted, history = fit_gaussians(init, target, FitConfig(iterations=10))
        assert len(history) == 11
        assert len(fitted) == 16
        assert all(isinstance(g, Gaussian2D) for g in fitted)

    def test_zero_iterations_is_identity(self):
        target = synthetic_target(1, 16, 16)
        init = init_level_gaussians(target, 4, 4)
        fitted, history = fit_gaussians(init, target, FitConfig(iterations=0))
        assert fitted == init
        assert len(history) == 1

    def test_small_steps_descend_monotonically(self):
        target = synthetic_target(2, 16, 16)
        init = init_level_gaussians(target, 4, 4)
        _, history = fit_gaussians(
            init, target, FitConfig(iterations=40, learning_rate=1e-3)
        )
        diffs = np.diff(history)
        assert np.all(diffs <= 1e-15)
        assert history[-1] < history[0]

    def test_sigma_never_moves(self):
        target = synthetic_target(3, 16, 16)
        init = init_level_gaussians(target, 4, 4)
        fitted, _ = fit_gaussians(init, target, FAST)
        assert all(g.sigma == init[0].sigma for g in fitted)

    def test_default_config_fits_finest_layout_well(self):
        # the default step is tuned for one-pixel cells, the layout every
        # full-budget experiment fits
        target = synthetic_target(4)
        init = init_level_gaussians(target, 32, 32)
        _, history = fit_gaussians(init, target, FitConfig())
        assert history[-1] < 0.05 * history[0]
        assert history[-1] < 1e-5


class TestGradientScorePyramid:
    def test_shapes_and_determinism(self):
        target = synthetic_target(5)
        a = gradient_score_pyramid(target, 3, FAST)
        b = gradient_score_pyramid(target, 3, FAST)
        assert a.num_views == 1 and a.num_levels == 3
        assert a.level_shape(1) == (8, 8)
        assert a.level_shape(2) == (16, 16)
        for level in (1, 2):
            g = a.grid(0, level).data
            assert np.array_equal(g, b.grid(0, level).data)
            assert np.all(g >= 0.0)

    def test_rejects_non_tiling_image(self):
        with pytest.raises(ValueError):
            gradient_score_pyramid(np.zeros((17, 32)), 3, FAST)


class TestStrategyDispatch:
    def test_random_is_seeded_by_config(self):
        target = synthetic_target(6)
        a = strategy_pyramid(target, StrategyKind.UNIFORM_RANDOM, 3, FitConfig(seed=4))
        b = strategy_pyramid(target, StrategyKind.UNIFORM_RANDOM, 3, FitConfig(seed=4))
        c = strategy_pyramid(target, StrategyKind.UNIFORM_RANDOM, 3, FitConfig(seed=5))
        assert np.array_equal(a.grid(0, 1).data, b.grid(0, 1).data)
        assert not np.array_equal(a.grid(0, 1).data, c.grid(0, 1).data)

    def test_sobel_ignores_fit_config(self):
        target = synthetic_target(7)
        a = strategy_pyramid(target, StrategyKind.SOBEL_FREQUENCY, 3, FitConfig(seed=1))
        b = strategy_pyramid(target, StrategyKind.SOBEL_FREQUENCY, 3, FitConfig(seed=9))
        assert np.array_equal(a.grid(0, 2).data, b.grid(0, 2).data)


class TestAllocationGaussians:
    def test_sizes_follow_levels(self):
        target = synthetic_target(8)
        pyr = strategy_pyramid(target, StrategyKind.SOBEL_FREQUENCY, 3, FAST)
        masks = compute_masks(pyr, 0.5)
        gaussians = allocation_gaussians(target, masks)
        counts = [int(masks.mask(0, l).sum()) for l in (1, 2, 3)]
        assert len(gaussians) == sum(counts)
        sigmas = sorted({g.sigma for g in gaussians}, reverse=True)
        # cell widths are 4, 2, 1 pixels at levels 1, 2, 3
        expected = [SIGMA_FACTOR * w for w, n in zip((4, 2, 1), counts) if n]
        assert sigmas == expected

    def test_full_coarse_allocation_reproduces_grid_init(self):
        target = synthetic_target(9)
        pyr = strategy_pyramid(target, StrategyKind.SOBEL_FREQUENCY, 3, FAST)
        masks = compute_masks(pyr, math.inf)
        gaussians = allocation_gaussians(target, masks)
        assert gaussians == init_level_gaussians(target, 8, 8)


class TestRunStrategyExperiment:
    def test_report_fields_and_budget_respected(self):
        target = synthetic_target(10)
        rep = run_strategy_experiment(
            target, 0.25, StrategyKind.SOBEL_FREQUENCY, FAST
        )
        budget = int(0.25 * 1024)
        assert rep.strategy == "sobel"
        assert rep.budget_fraction == 0.25
        assert rep.seed == FAST.seed
        assert rep.achieved_count <= budget
        assert sum(rep.per_level_counts) == rep.achieved_count
        assert len(rep.per_level_counts) == EXPERIMENT_LEVELS
        assert rep.final_mse >= 0.0

    def test_report_json_roundtrip(self):
        target = synthetic_target(11)
        rep = run_strategy_experiment(target, 0.5, StrategyKind.UNIFORM_RANDOM, FAST)
        obj = json.loads(json.dumps(rep.to_json()))
        assert obj["strategy"] == "random"
        assert obj["achieved_count"] == rep.achieved_count
        assert obj["per_level_counts"] == list(rep.per_level_counts)
        assert obj["final_mse"] == rep.final_mse

    def test_full_budget_is_strategy_independent(self):
        # budget fraction 1 refines everything, so scores cannot matter
        target = synthetic_target(12)
        cfg = FitConfig(iterations=60)
        reports = [
            run_strategy_experiment(target, 1.0, s, cfg) for s in StrategyKind
        ]
        assert all(r.achieved_count == 1024 for r in reports)
        assert all(r.per_level_counts == (0, 0, 1024) for r in reports)
        assert len({r.final_mse for r in reports}) == 1

    def test_constant_image_fits_to_noise_floor(self):
        rep = run_strategy_experiment(
            np.full((32, 32), 0.5), 1.0, StrategyKind.GRADIENT_SCORE, FitConfig()
        )
        assert rep.final_mse < 1e-6

    def test_gradient_strategy_concentrates_on_structure(self):
        # flat background with one noisy offset patch: every finest-level
        # cell the gradient scores buy must land inside the patch
        rng = np.random.default_rng(11)
        target = np.full((32, 32), 0.4)
        target[8:24, 8:24] += 0.15 + 0.05 * rng.standard_normal((16, 16))
        target = np.clip(target, 0.0, 1.0)
        cfg = FitConfig()
        pyr = strategy_pyramid(target, StrategyKind.GRADIENT_SCORE, 3, cfg)
        tau, achieved = match_budget(build_table(pyr), 256)
        assert achieved == 256
        masks = compute_masks(pyr, tau)
        fine = masks.mask(0, 3)
        inside = int(fine[8:24, 8:24].sum())
        assert int(fine.sum()) == inside
        assert inside >= 60

    @pytest.mark.parametrize("fraction", [0.0, -0.5, 1.5])
    def test_rejects_bad_fraction(self, fraction):
        with pytest.raises(ValueError):
            run_strategy_experiment(
                synthetic_target(0), fraction, StrategyKind.UNIFORM_RANDOM, FAST
            )

    def test_rejects_non_2d_target(self):
        with pytest.raises(ValueError):
            run_strategy_experiment(
                np.zeros(32), 0.5, StrategyKind.UNIFORM_RANDOM, FAST
            )


class TestSyntheticTarget:
    def test_deterministic_and_bounded(self):
        a = synthetic_target(13)
        b = synthetic_target(13)
        c = synthetic_target(14)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)
        assert a.shape == (32, 32)
        assert a.min() >= 0.0 and a.max() <= 1.0

    def test_has_structure_to_allocate(self):
        img = synthetic_target(15)
        assert img.std() > 0.05

    def test_custom_dims(self):
        assert synthetic_target(16, 16, 24).shape == (16, 24)


def test_experiment_report_is_plain_data():
    rep = ExperimentReport(
        strategy="sobel",
        budget_fraction=0.25,
        seed=3,
        achieved_count=250,
        tau=0.5,
        final_mse=1e-3,
        per_level_counts=(10, 20, 220),
    )
    assert rep.to_json()["tau"] == 0.5
