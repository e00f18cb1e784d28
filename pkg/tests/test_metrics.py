"""Ranking metrics against brute-force oracles."""

import numpy as np
import pytest

from bdmreg import DegenerateLabels, auc, average_precision
from oracles import pairwise_auc, rank_average_precision


class TestAuc:
    def test_perfect_ranking(self):
        assert auc([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0]) == 1.0

    def test_inverted_ranking(self):
        assert auc([0.1, 0.2, 0.8, 0.9], [1, 1, 0, 0]) == 0.0

    def test_coin_flip(self):
        assert auc([0.5, 0.5], [1, 0]) == 0.5

    def test_interleaved(self):
        # Pairs: (0.8 vs 0.9) loses, (0.8 vs 0.3) wins, (0.2 vs 0.9)
        # loses, (0.2 vs 0.3) loses: 1/4.
        assert auc([0.8, 0.2, 0.9, 0.3], [1, 1, 0, 0]) == 0.25

    def test_degenerate_labels(self):
        with pytest.raises(DegenerateLabels):
            auc([0.5, 0.6], [1, 1])
        with pytest.raises(DegenerateLabels):
            auc([0.5, 0.6], [0, 0])

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            k = int(rng.integers(2, 12))
            scores = rng.normal(size=k)
            labels = rng.integers(0, 2, size=k)
            if labels.min() == labels.max():
                labels[0] = 1 - labels[0]
            a = auc(scores, labels)
            b = auc(np.exp(scores / 2.0), labels)
            np.testing.assert_allclose(a, b, atol=1e-12)

    def test_label_flip_symmetry(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            k = int(rng.integers(2, 12))
            scores = rng.choice([0.1, 0.5, 0.9], size=k)
            labels = rng.integers(0, 2, size=k)
            if labels.min() == labels.max():
                labels[0] = 1 - labels[0]
            np.testing.assert_allclose(
                auc(scores, labels) + auc(scores, 1 - labels), 1.0
            )

    def test_matches_pairwise_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            k = int(rng.integers(2, 10))
            scores = rng.choice([0.1, 0.5, 0.9], size=k)
            labels = rng.integers(0, 2, size=k)
            if labels.min() == labels.max():
                labels[0] = 1 - labels[0]
            np.testing.assert_allclose(
                auc(scores, labels),
                pairwise_auc(scores, labels),
                atol=1e-12,
            )


class TestAveragePrecision:
    def test_perfect_ranking(self):
        assert average_precision([0.9, 0.8, 0.2], [1, 1, 0]) == 1.0

    def test_single_positive_at_rank_two(self):
        # Precision at the positive's position: 1/2.
        assert average_precision([0.9, 0.8], [0, 1]) == 0.5

    def test_mixed_example(self):
        # Descending order: positives at ranks 1 and 3:
        # (1/1 + 2/3) / 2 = 5/6.
        np.testing.assert_allclose(
            average_precision([0.9, 0.8, 0.7], [1, 0, 1]), 5.0 / 6.0
        )

    def test_all_positives(self):
        with pytest.raises(DegenerateLabels):
            average_precision([0.5, 0.6], [1, 1])

    def test_ties_broken_by_input_position(self):
        # Stable sort keeps the earlier-listed element first among equal
        # scores, pinning the tie convention rather than leaving it to
        # chance.
        assert average_precision([0.5, 0.5], [1, 0]) == 1.0
        assert average_precision([0.5, 0.5], [0, 1]) == 0.5

    def test_matches_rank_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            k = int(rng.integers(2, 10))
            scores = rng.choice([0.1, 0.5, 0.9], size=k)
            labels = rng.integers(0, 2, size=k)
            if labels.min() == labels.max():
                labels[0] = 1 - labels[0]
            np.testing.assert_allclose(
                average_precision(scores, labels),
                rank_average_precision(scores, labels),
                atol=1e-12,
            )


class TestValidation:
    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            auc([0.5], [1, 0])

    def test_non_binary_labels(self):
        with pytest.raises(ValueError):
            auc([0.5, 0.6, 0.7], [0, 1, 2])
