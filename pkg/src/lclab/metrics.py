"""Classification metrics, top-k entropy of prediction scores and Welch's t-test."""

from __future__ import annotations

import numpy as np
from scipy import special


def confusion_matrix(y_true, y_pred, num_classes):
    """Counts with rows = true class, columns = predicted class."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape:
        raise ValueError("y_true and y_pred differ in length")
    cm = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(cm, (y_true, y_pred), 1)
    return cm


def accuracy(confusion):
    confusion = np.asarray(confusion)
    total = confusion.sum()
    if total == 0:
        raise ValueError("empty confusion matrix")
    return float(np.trace(confusion) / total)


def weighted_f1(confusion):
    """Support-weighted F1; classes with precision + recall = 0 contribute 0."""
    cm = np.asarray(confusion, dtype=np.float64)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1] or cm.size == 0:
        raise ValueError("confusion matrix must be square and non-empty")
    total = cm.sum()
    if total == 0:
        raise ValueError("empty confusion matrix")
    tp = np.diag(cm)
    support = cm.sum(axis=1)
    predicted = cm.sum(axis=0)
    precision = np.divide(tp, predicted, out=np.zeros_like(tp), where=predicted > 0)
    recall = np.divide(tp, support, out=np.zeros_like(tp), where=support > 0)
    denom = precision + recall
    f1 = np.divide(2 * precision * recall, denom, out=np.zeros_like(tp), where=denom > 0)
    return float(np.sum(support / total * f1))


def _check_scores(scores, atol=1e-9):
    S = np.asarray(scores, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] == 0 or S.shape[1] == 0:
        raise ValueError("score matrix must be a non-empty N x C array")
    if np.any(S < 0) or not np.allclose(S.sum(axis=1), 1.0, rtol=0, atol=atol):
        raise ValueError("score rows must lie on the probability simplex")
    return S


def topk_entropy(scores, k, atol=1e-9):
    """Mean base-2 entropy of each row's renormalized top-``k`` scores."""
    S = _check_scores(scores, atol)
    c = S.shape[1]
    if not 1 <= k <= c:
        raise ValueError(f"k must be in [1, {c}], got {k}")
    # stable sort on -S keeps lower class index first among ties
    order = np.argsort(-S, axis=1, kind="stable")[:, :k]
    top = np.take_along_axis(S, order, axis=1)
    mass = top.sum(axis=1, keepdims=True)
    p = np.divide(top, mass, out=np.full_like(top, 1.0 / k), where=mass > 0)
    plogp = np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return float(np.mean(-plogp.sum(axis=1)))


def entropy_curve(scores, k_max=None, atol=1e-9):
    S = _check_scores(scores, atol)
    k_max = min(S.shape[1], 10) if k_max is None else k_max
    if not 1 <= k_max <= S.shape[1]:
        raise ValueError(f"k_max must be in [1, {S.shape[1]}], got {k_max}")
    return [(k, topk_entropy(S, k, atol)) for k in range(1, k_max + 1)]


def welch_t_test(sample_a, sample_b):
    """Two-sided Welch t-test; returns ``(t, p)``.

    The p-value is the regularized incomplete beta form of the Student t tail
    with Welch-Satterthwaite degrees of freedom.
    """
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise ValueError("each sample needs at least two values")
    va = a.var(ddof=1) / a.size
    vb = b.var(ddof=1) / b.size
    se2 = va + vb
    diff = a.mean() - b.mean()
    if se2 == 0:
        raise ValueError("both samples have zero variance")
    t = diff / np.sqrt(se2)
    df = se2 ** 2 / (va ** 2 / (a.size - 1) + vb ** 2 / (b.size - 1))
    p = special.betainc(df / 2.0, 0.5, df / (df + t * t))
    return float(t), float(min(1.0, p))
