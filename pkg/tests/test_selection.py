import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import separable
from selbias.classifiers import SvmConfig, SvmModel
from selbias.data import LabeledDataset, synth_null
from selbias.errors import SelectionError
from selbias.selection import (
    GeneSubset,
    RfeSchedule,
    rank_by_weight,
    rfe_path,
    rfe_schedule,
    subset_from_text,
    subset_to_text,
    t_screen,
    t_statistics,
)

TABLE1_SIZES = (5422, 4096, 2048, 1024, 512, 256, 128, 64, 32, 16, 8, 4, 2, 1)
TABLE2_SIZES = (70, 64, 32, 16, 8, 4, 2, 1)


class TestSchedule:
    def test_table1(self):
        assert rfe_schedule(5422).sizes == TABLE1_SIZES

    def test_table2(self):
        assert rfe_schedule(70).sizes == TABLE2_SIZES

    def test_power_of_two(self):
        assert rfe_schedule(8).sizes == (8, 4, 2, 1)

    def test_small(self):
        assert rfe_schedule(1).sizes == (1,)
        assert rfe_schedule(3).sizes == (3, 2, 1)

    def test_invalid(self):
        with pytest.raises(SelectionError):
            rfe_schedule(0)
        with pytest.raises(SelectionError):
            RfeSchedule((4, 4, 1))

    def test_single_step_floor(self):
        assert rfe_schedule(40, floor=10).sizes == (40, 32, 16, 8, 7, 6, 5, 4, 3, 2, 1)

    @given(st.integers(1, 100_000))
    def test_properties(self, p):
        sizes = rfe_schedule(p).sizes
        assert sizes[0] == p and sizes[-1] == 1
        assert all(a > b for a, b in zip(sizes, sizes[1:]))
        assert all(d & (d - 1) == 0 for d in sizes[1:])


def _model(weights, features):
    return SvmModel(0.0, np.array(weights), tuple(features), 1.0, True, 0.0)


class TestRank:
    def test_magnitude(self):
        assert rank_by_weight(_model([0.5, -2.0, 1.0], [1, 2, 3])).indices == (2, 3, 1)

    def test_tie_lower_index(self):
        assert rank_by_weight(_model([1.0, 1.0], [4, 2])).indices == (2, 4)

    def test_zero_weight(self):
        assert rank_by_weight(_model([0.0, 0.1], [1, 2])).indices == (2, 1)


class TestRfePath:
    def test_informative_feature_survives(self):
        data = separable(p=8, informative=3, seed=1)
        sched = rfe_schedule(8)
        path = rfe_path(data, sched)
        for step in path:
            assert 3 in step.subset
        for d in sched:
            assert oracles.rfe_subset(data, range(data.n), d, sched.sizes, SvmConfig()) == set(path[d].subset)

    def test_single_size(self):
        data = synth_null(10, 5, (5, 5))
        path = rfe_path(data, RfeSchedule((5,)))
        assert len(path.steps) == 1
        assert sorted(path[5].subset) == [0, 1, 2, 3, 4]

    def test_schedule_too_long(self):
        with pytest.raises(SelectionError):
            rfe_path(synth_null(10, 5, (5, 5)), RfeSchedule((8, 4)))

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 10_000), p=st.integers(2, 40))
    def test_nesting(self, seed, p):
        data = synth_null(14, p, (7, 7), seed=seed)
        path = rfe_path(data, rfe_schedule(p))
        subsets = [set(s.subset) for s in path]
        for big, small in zip(subsets, subsets[1:]):
            assert small <= big
        assert [len(s) for s in subsets] == list(rfe_schedule(p).sizes)

    def test_matches_oracle_on_null(self):
        data = synth_null(16, 20, (8, 8), seed=5)
        sched = rfe_schedule(20)
        path = rfe_path(data, sched)
        for d in sched:
            assert set(path[d].subset) == oracles.rfe_subset(data, range(16), d, sched.sizes, SvmConfig())


class TestTScreen:
    def test_worked_value(self):
        data = LabeledDataset([[1.0], [3.0], [5.0], [7.0]], np.array([1, 1, 2, 2]))
        t = t_statistics(data.matrix, data.labels)[0]
        assert t == pytest.approx(-4 / (math.sqrt(2) * math.sqrt(1.0)), rel=1e-12)
        assert abs(t) == pytest.approx(2.8284271247, rel=1e-9)

    def test_equal_means_rank_last(self):
        X = np.array([[1.0, 0.0, 5.0], [3.0, 1.0, 2.0], [3.0, 2.0, 1.0], [1.0, 3.0, 0.0]])
        data = LabeledDataset(X, np.array([1, 1, 2, 2]))
        top = t_screen(data, 3)
        assert top.indices[-1] == 0
        assert top.scores[-1] == 0.0

    def test_full_permutation(self):
        data = synth_null(12, 9, (6, 6), seed=1)
        assert sorted(t_screen(data, 9).indices) == list(range(9))

    def test_matches_scipy(self):
        data = synth_null(15, 30, (7, 8), seed=2)
        assert list(t_screen(data, 10).indices) == oracles.screen(data, range(15), 10)

    def test_small_class(self):
        data = LabeledDataset(np.arange(6.0).reshape(3, 2), np.array([1, 1, 2]))
        with pytest.raises(SelectionError):
            t_screen(data, 1)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 1000), shift=st.floats(-1e3, 1e3))
    def test_location_invariance(self, seed, shift):
        data = synth_null(12, 6, (6, 6), seed=seed)
        shifted = LabeledDataset(data.matrix + shift, data.labels)
        np.testing.assert_allclose(
            t_statistics(shifted.matrix, shifted.labels),
            t_statistics(data.matrix, data.labels),
            atol=1e-8 * (1 + abs(shift)),
        )


def test_subset_text_round_trip():
    data = synth_null(12, 9, (6, 6), seed=1)
    top = t_screen(data, 4)
    text = subset_to_text(top, data.feature_names)
    assert text.splitlines()[0].startswith("1\t")
    assert subset_from_text(text, data.feature_names) == top


def test_subset_rejects_duplicates():
    with pytest.raises(SelectionError):
        GeneSubset((1, 1))
