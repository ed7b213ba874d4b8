import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from lclab.metrics import accuracy, confusion_matrix, entropy_curve, topk_entropy, weighted_f1, welch_t_test

# Frozen: t from the closed form; p from numerically integrating the t(4) density.
WELCH_T = 12.24744871391589
WELCH_P = 0.00025521674944192676


class TestConfusion:
    def test_hand_count(self):
        cm = confusion_matrix([0, 0, 1, 2, 2], [0, 1, 1, 2, 0], 3)
        np.testing.assert_array_equal(cm, [[1, 1, 0], [0, 1, 0], [1, 0, 1]])
        assert accuracy(cm) == 0.6

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4)), min_size=1, max_size=40))
    def test_row_sums_are_class_counts(self, pairs):
        t, p = zip(*pairs)
        cm = confusion_matrix(t, p, 5)
        np.testing.assert_array_equal(cm.sum(axis=1), np.bincount(t, minlength=5))
        assert cm.sum() == len(pairs)


class TestF1:
    def test_diagonal(self):
        assert weighted_f1(np.diag([3, 4, 5])) == 1.0

    def test_constant_predictor(self):
        assert abs(weighted_f1([[5, 0], [5, 0]]) - 1 / 3) < 1e-12

    def test_mixed(self):
        # class 0: p=3/5, r=3/4, F1=2/3; class 1: p=4/5, r=2/3, F1=8/11; weights 0.4, 0.6
        assert abs(weighted_f1([[3, 1], [2, 4]]) - 116 / 165) < 1e-12

    def test_single_class(self):
        assert weighted_f1([[7]]) == 1.0

    def test_empty(self):
        with pytest.raises(ValueError):
            weighted_f1(np.zeros((2, 2)))

    @settings(max_examples=100, deadline=None)
    @given(arrays(np.int64, (3, 3), elements=st.integers(0, 9)))
    def test_range_and_perfect_iff_diagonal(self, cm):
        if cm.sum() == 0:
            return
        f = weighted_f1(cm)
        assert 0.0 <= f <= 1.0 + 1e-15
        off_diagonal = cm.sum() - np.trace(cm)
        assert (abs(f - 1.0) < 1e-12) == (off_diagonal == 0)


class TestEntropy:
    def test_k1_zero(self, rng):
        assert topk_entropy(rng.dirichlet(np.ones(5), size=8), 1) == 0.0

    @pytest.mark.parametrize("k", [1, 2, 3, 4])
    def test_uniform(self, k):
        assert topk_entropy(np.full((3, 4), 0.25), k) == pytest.approx(math.log2(k), abs=1e-12)

    def test_hand_row(self):
        expected = -(2 / 3) * math.log2(2 / 3) - (1 / 3) * math.log2(1 / 3)
        assert abs(topk_entropy([[0.5, 0.25, 0.125, 0.125]], 2) - expected) < 1e-9

    def test_ties_at_cutoff(self):
        row = [0.3, 0.4, 0.3, 0.0]
        assert topk_entropy([row], 2) == pytest.approx(oracles.topk_entropy_row(row, 2), abs=1e-12)

    @pytest.mark.parametrize("k", [0, 5])
    def test_k_range(self, k):
        with pytest.raises(ValueError):
            topk_entropy(np.full((1, 4), 0.25), k)

    def test_off_simplex(self):
        with pytest.raises(ValueError):
            topk_entropy([[0.5, 0.6]], 1)

    def test_full_k_is_entropy(self, rng):
        S = rng.dirichlet(np.ones(6), size=5)
        full = np.mean([-(r * np.log2(r)).sum() for r in S])
        assert topk_entropy(S, 6) == pytest.approx(full, abs=1e-12)

    def test_curve_against_row_oracle(self, rng):
        S = rng.dirichlet(np.ones(5), size=10)
        for k, value in entropy_curve(S, 5):
            expected = sum(oracles.topk_entropy_row(list(r), k) for r in S) / len(S)
            assert value == pytest.approx(expected, abs=1e-12)

    def test_curve_defaults(self):
        curve = entropy_curve(np.full((2, 12), 1 / 12))
        assert [k for k, _ in curve] == list(range(1, 11))
        assert curve[0][1] == 0.0
        np.testing.assert_allclose([v for _, v in curve], np.log2(np.arange(1, 11)), atol=1e-12)


class TestWelch:
    def test_identical(self):
        t, p = welch_t_test([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        assert t == 0.0 and p == 1.0

    def test_separated(self):
        _, p = welch_t_test([0.0, 1e-3, -1e-3], [1.0, 1.001, 0.999])
        assert p < 0.01

    def test_reference_values(self):
        t, p = welch_t_test([2.1, 2.0, 1.9], [1.0, 1.1, 0.9])
        assert t == pytest.approx(WELCH_T, rel=1e-12)
        assert p == pytest.approx(WELCH_P, rel=1e-9)

    def test_degenerate(self):
        with pytest.raises(ValueError):
            welch_t_test([1.0, 1.0], [2.0, 2.0])
        with pytest.raises(ValueError):
            welch_t_test([1.0], [2.0, 3.0])
