import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from splatalloc.budget import (
    BudgetQuery,
    ThresholdBudgetTable,
    build_table,
    load_table,
    match_budget,
    oracle_counts,
    save_table,
    save_table_json,
)
from splatalloc.errors import (
    BudgetAboveMaximumError,
    BudgetBelowMinimumError,
    BudgetRangeError,
)
from splatalloc.grids import LevelGrid, ScorePyramid
from splatalloc.masks import compute_masks, count_gaussians


def make_pyramid(views, levels, ch, cw, seed=0):
    rng = np.random.default_rng(seed)
    grids = tuple(
        tuple(
            LevelGrid(rng.random((ch * 2 ** (l - 1), cw * 2 ** (l - 1))))
            for l in range(1, levels)
        )
        for _ in range(views)
    )
    return ScorePyramid(num_views=views, num_levels=levels, grids=grids)


def pyramid_from_levels(*levels):
    return ScorePyramid(
        num_views=1,
        num_levels=len(levels) + 1,
        grids=(tuple(LevelGrid(g) for g in levels),),
    )


FROZEN = pyramid_from_levels([[0.9, 0.2], [0.4, 0.7]])


def assert_counts_realizable(pyramid, table):
    """Every tabulated count, read at the end of its tie run, must equal the
    direct mask count at that threshold."""
    for k in range(len(table)):
        tau = float(table.thresholds[k])
        ascending = table.thresholds[::-1]
        last = len(table) - 1 - int(np.searchsorted(ascending, tau, side="left"))
        if k != last:
            continue
        assert int(table.counts[k]) == count_gaussians(compute_masks(pyramid, tau))


class TestTableValidation:
    def test_rejects_increasing_thresholds(self):
        with pytest.raises(ValueError):
            ThresholdBudgetTable(
                thresholds=[0.1, 0.2], counts=[4, 7], base_count=1, max_count=7
            )

    def test_rejects_decreasing_counts(self):
        with pytest.raises(ValueError):
            ThresholdBudgetTable(
                thresholds=[0.2, 0.1], counts=[7, 4], base_count=1, max_count=4
            )

    def test_rejects_max_count_mismatch(self):
        with pytest.raises(ValueError):
            ThresholdBudgetTable(
                thresholds=[0.2], counts=[7], base_count=1, max_count=10
            )

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            ThresholdBudgetTable(
                thresholds=[], counts=[], base_count=1, max_count=1
            )

    def test_arrays_frozen_and_len(self):
        t = ThresholdBudgetTable(
            thresholds=[0.2], counts=[7], base_count=4, max_count=7
        )
        assert len(t) == 1
        with pytest.raises(ValueError):
            t.counts[0] = 0

    def test_query_rejects_negative(self):
        with pytest.raises(ValueError):
            BudgetQuery(-1)


class TestBuildTable:
    def test_frozen_two_level_example(self):
        table = build_table(FROZEN)
        assert table.thresholds.tolist() == [0.9, 0.7, 0.4, 0.2]
        assert table.counts.tolist() == [7, 10, 13, 16]
        assert table.base_count == 4
        assert table.max_count == 16

    def test_no_fold_when_children_score_below_parents(self):
        pyr = pyramid_from_levels([[0.9]], [[0.5, 0.6], [0.7, 0.8]])
        table = build_table(pyr)
        assert table.thresholds.tolist() == [0.9, 0.8, 0.7, 0.6, 0.5]
        assert table.counts.tolist() == [4, 7, 10, 13, 16]
        assert_counts_realizable(pyr, table)

    def test_equal_scores_fold_to_root(self):
        # a uniform pyramid refines all at once: every count equals the max
        pyr = pyramid_from_levels([[0.5]], [[0.5, 0.5], [0.5, 0.5]])
        table = build_table(pyr)
        assert table.thresholds.tolist() == [0.5] * 5
        assert table.counts.tolist() == [16] * 5
        assert_counts_realizable(pyr, table)

    def test_high_child_under_low_parent_inherits_parent_activation(self):
        # the mid cell scores 0.9 but sits under a 0.3 root, so its +3 fires
        # at 0.3, not 0.9; same for the 0.5 grandchild
        level3 = np.full((4, 4), 0.05)
        level3[0, 0] = 0.5
        pyr = pyramid_from_levels(
            [[0.3]], [[0.9, 0.1], [0.1, 0.1]], level3
        )
        table = build_table(pyr)
        for tau, expected in (
            (0.9, 1), (0.5, 1), (0.3, 10), (0.1, 19), (0.05, 64)
        ):
            assert count_gaussians(compute_masks(pyr, tau)) == expected
        assert_counts_realizable(pyr, table)
        # count stays at the base until tau reaches the root score
        above_root = table.thresholds > 0.3
        assert np.all(table.counts[above_root] == 1)

    @given(
        views=st.integers(1, 2),
        levels=st.integers(2, 4),
        seed=st.integers(0, 2**31),
    )
    @settings(max_examples=25, deadline=None)
    def test_fuzz_counts_realizable(self, views, levels, seed):
        pyr = make_pyramid(views, levels, 1, 2, seed=seed)
        assert_counts_realizable(pyr, build_table(pyr))

    def test_matches_packaged_oracle(self):
        for seed in range(5):
            pyr = make_pyramid(2, 4, 1, 1, seed=seed)
            table = build_table(pyr)
            for tau, expected in oracle_counts(pyr):
                if math.isinf(tau):
                    assert table.base_count == expected
                    continue
                ascending = table.thresholds[::-1]
                last = len(table) - 1 - int(
                    np.searchsorted(ascending, tau, side="left")
                )
                assert int(table.counts[last]) == expected

    def test_table_size_and_endpoints(self):
        pyr = make_pyramid(2, 3, 2, 2, seed=11)
        table = build_table(pyr)
        # one row per score cell over all views and scored levels
        assert len(table) == 2 * (4 + 16)
        assert int(table.counts[-1]) == pyr.max_count
        assert table.base_count == pyr.base_count


class TestMatchBudget:
    def test_exact_and_between_targets(self):
        table = build_table(FROZEN)
        assert match_budget(table, 7) == (0.9, 7)
        assert match_budget(table, 9) == (0.9, 7)
        assert match_budget(table, 10) == (0.7, 10)
        assert match_budget(table, 12) == (0.7, 10)
        assert match_budget(table, 13) == (0.4, 13)
        assert match_budget(table, 16) == (0.2, 16)

    def test_below_first_entry_returns_all_coarse(self):
        table = build_table(FROZEN)
        assert match_budget(table, 4) == (math.inf, 4)
        assert match_budget(table, 6) == (math.inf, 4)

    def test_accepts_query_objects(self):
        table = build_table(FROZEN)
        assert match_budget(table, BudgetQuery(10)) == (0.7, 10)

    def test_out_of_range_raises_with_bounds(self):
        table = build_table(FROZEN)
        with pytest.raises(BudgetBelowMinimumError) as lo:
            match_budget(table, 3)
        assert (lo.value.target, lo.value.low, lo.value.high) == (3, 4, 16)
        with pytest.raises(BudgetAboveMaximumError) as hi:
            match_budget(table, 17)
        assert (hi.value.target, hi.value.low, hi.value.high) == (17, 4, 16)
        assert issubclass(BudgetBelowMinimumError, BudgetRangeError)
        assert issubclass(BudgetAboveMaximumError, BudgetRangeError)

    def test_tie_run_resolves_to_realizable_count(self):
        # constant scores: any admissible budget above base lands on all-fine
        pyr = pyramid_from_levels(np.full((2, 2), 0.5))
        table = build_table(pyr)
        assert match_budget(table, 4) == (math.inf, 4)
        assert match_budget(table, 10) == (0.5, 16)
        assert match_budget(table, 16) == (0.5, 16)
        assert count_gaussians(compute_masks(pyr, 0.5)) == 16

    @given(seed=st.integers(0, 2**31), levels=st.integers(2, 4))
    @settings(max_examples=20, deadline=None)
    def test_achieved_always_realizable(self, seed, levels):
        pyr = make_pyramid(1, levels, 1, 2, seed=seed)
        table = build_table(pyr)
        for target in range(table.base_count, table.max_count + 1, 7):
            tau, achieved = match_budget(table, target)
            assert achieved == count_gaussians(compute_masks(pyr, tau))

    def test_slack_bound_with_unique_scores(self):
        for seed in range(8):
            for levels in (2, 3, 4):
                pyr = make_pyramid(1, levels, 1, 1, seed=seed)
                values = np.concatenate(
                    [pyr.grid(0, l).data.ravel() for l in range(1, levels)]
                )
                assert np.unique(values).size == values.size
                table = build_table(pyr)
                bound = 4 ** (levels - 1) - 1
                for target in range(table.base_count, table.max_count + 1):
                    tau, achieved = match_budget(table, target)
                    assert 0 <= target - achieved < bound


class TestTableIO:
    def test_binary_roundtrip_bitwise(self, tmp_path):
        table = build_table(make_pyramid(2, 3, 2, 2, seed=13))
        path = tmp_path / "table.tbl"
        save_table(table, path)
        back = load_table(path)
        assert np.array_equal(back.thresholds, table.thresholds)
        assert np.array_equal(back.counts, table.counts)
        assert back.base_count == table.base_count
        assert back.max_count == table.max_count

    def test_binary_layout(self, tmp_path):
        table = build_table(FROZEN)
        path = tmp_path / "table.tbl"
        save_table(table, path)
        raw = path.read_bytes()
        assert len(raw) == 8 + 16 * 4 + 16
        assert int.from_bytes(raw[:8], "little") == 4
        first_tau = np.frombuffer(raw, dtype="<f8", count=1, offset=8)[0]
        assert first_tau == 0.9

    def test_truncated_file_rejected(self, tmp_path):
        table = build_table(FROZEN)
        path = tmp_path / "table.tbl"
        save_table(table, path)
        path.write_bytes(path.read_bytes()[:-5])
        with pytest.raises(ValueError):
            load_table(path)

    def test_json_mirror(self, tmp_path):
        table = build_table(FROZEN)
        path = tmp_path / "table.json"
        save_table_json(table, path)
        obj = json.loads(path.read_text())
        assert obj["K"] == 4
        assert obj["base_count"] == 4
        assert obj["max_count"] == 16
        assert obj["thresholds"] == [0.9, 0.7, 0.4, 0.2]
        assert obj["counts"] == [7, 10, 13, 16]
