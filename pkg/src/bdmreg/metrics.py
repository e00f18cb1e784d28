"""Ranking metrics for scored edge sets.

AUC is the Mann-Whitney statistic: the fraction of (positive, negative)
pairs ranked correctly, ties counted one half.  Average precision sorts by
descending score with ties kept in input order (stable) and averages the
precision at each positive's rank.  Both need at least one positive and one
negative label.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateLabels


def _check(scores, labels):
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.ndim != 1 or scores.shape != labels.shape:
        raise ValueError("scores and labels must be 1-D and the same length")
    if not np.isin(labels, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    labels = labels.astype(np.int64)
    n_pos = int(labels.sum())
    if n_pos == 0 or n_pos == labels.size:
        raise DegenerateLabels("need at least one positive and one negative")
    return scores, labels, n_pos


def _average_ranks(scores: np.ndarray) -> np.ndarray:
    """1-based ranks, ties sharing their mean rank."""
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(scores.size)
    sorted_scores = scores[order]
    i = 0
    while i < scores.size:
        j = i
        while j + 1 < scores.size and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def auc(scores, labels) -> float:
    """Probability a random positive outscores a random negative (ties 1/2)."""
    scores, labels, n_pos = _check(scores, labels)
    n_neg = labels.size - n_pos
    ranks = _average_ranks(scores)
    u = ranks[labels == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def average_precision(scores, labels) -> float:
    """Mean precision at each positive's rank, descending-score order."""
    scores, labels, n_pos = _check(scores, labels)
    order = np.argsort(-scores, kind="stable")
    sorted_labels = labels[order]
    hits = np.cumsum(sorted_labels)
    positions = np.flatnonzero(sorted_labels == 1)
    precisions = hits[positions] / (positions + 1.0)
    return float(precisions.sum() / n_pos)
