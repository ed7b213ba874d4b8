"""Exhaustive search for the most confusable class subsets of a confusion matrix."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations

import numpy as np


@dataclass(frozen=True)
class SubsetRanking:
    combos: np.ndarray  # (n_combos, m), each row ascending
    sums: np.ndarray
    num_classes: int
    m: int

    def __len__(self):
        return len(self.sums)

    def __getitem__(self, i):
        return tuple(int(c) for c in self.combos[i]), self.sums[i].item()

    def top(self, n=1):
        return [self[i] for i in range(min(n, len(self)))]


def _as_matrix(confusion, normalize=False):
    cm = np.asarray(confusion, dtype=np.float64)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1]:
        raise ValueError("confusion matrix must be square")
    if np.any(cm < 0):
        raise ValueError("confusion matrix entries must be non-negative")
    if normalize:
        rows = cm.sum(axis=1, keepdims=True)
        cm = np.divide(cm, rows, out=np.zeros_like(cm), where=rows > 0)
    return cm


def _rank(cm, classes, m):
    classes = np.asarray(classes, dtype=np.int64)
    if not 2 <= m <= len(classes):
        raise ValueError(f"subset size must be in [2, {len(classes)}], got {m}")
    # lexicographic generation order doubles as the tie-break
    combos = classes[np.array(list(combinations(range(len(classes)), m)), dtype=np.int64)]
    sums = np.zeros(len(combos))
    for a, b in permutations(range(m), 2):
        sums += cm[combos[:, a], combos[:, b]]
    order = np.argsort(-sums, kind="stable")
    return combos[order], sums[order]


def rank_subsets(confusion, m=4, normalize=False):
    """All ``m``-class combinations ranked by off-diagonal confusion mass."""
    cm = _as_matrix(confusion, normalize)
    c = cm.shape[0]
    combos, sums = _rank(cm, range(c), m)
    return SubsetRanking(combos, sums, c, m)


def hard_subset_sequence(confusion, m=4, rounds=1, normalize=False):
    """Greedy disjoint hard subsets: take the top combination, drop its
    classes, re-rank the rest, repeat.  Returns the combinations."""
    cm = _as_matrix(confusion, normalize)
    remaining = list(range(cm.shape[0]))
    if rounds < 1 or rounds * m > len(remaining):
        raise ValueError(f"{rounds} rounds of {m} classes need more than {len(remaining)} classes")
    picked = []
    for _ in range(rounds):
        combos, sums = _rank(cm, remaining, m)
        best = tuple(int(c) for c in combos[0])
        picked.append(best)
        remaining = [c for c in remaining if c not in best]
    return picked
