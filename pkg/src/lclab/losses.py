"""Training objectives: cross-entropy, self-supervised contrastive,
supervised contrastive and label-aware contrastive losses.

The three contrastive losses share one form.  For anchor ``i`` with
positive set ``P(i)`` and per-pair log-weights ``b[i, k]``::

    loss_i = LSE_{k != i}(s[i, k] + b[i, k]) - mean_{p in P(i)} (s[i, p] + b[i, i])

where ``s = H @ H.T / tau``.  The self-supervised loss uses ``P(i) = {g(i)}``
and ``b = 0``; the supervised loss uses every same-label index; the
label-aware loss sets ``b[i, k] = log w[i, y_k]``.  All three are summed
(not averaged) over the ``2K`` anchors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import diffcore as dc

WEIGHT_FLOOR = 1e-8


@dataclass(frozen=True)
class ContrastiveConfig:
    temperature: float = 0.3
    alpha: float = 0.5

    def __post_init__(self):
        if not self.temperature > 0:
            raise ValueError(f"temperature must be > 0, got {self.temperature}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")


def positive_mask(labels, pairing=None):
    """Boolean ``N x N`` mask of positives: same label, not self.

    If ``pairing`` is given it is checked to be a fixed-point-free involution
    whose partners share labels, so every anchor has at least one positive.
    """
    labels = np.asarray(labels)
    n = len(labels)
    mask = labels[:, None] == labels[None, :]
    np.fill_diagonal(mask, False)
    if pairing is not None:
        g = _check_pairing(pairing, n)
        if np.any(labels[g] != labels):
            raise ValueError("pairing links samples with different labels")
    if not np.all(mask.any(axis=1)):
        raise ValueError("an anchor has an empty positive set")
    return mask


def _check_pairing(pairing, n):
    g = np.asarray(pairing, dtype=np.int64)
    idx = np.arange(n)
    if g.shape != (n,) or np.any(g < 0) or np.any(g >= n):
        raise ValueError("pairing must map every index into range")
    if np.any(g == idx) or np.any(g[g] != idx):
        raise ValueError("pairing must be a fixed-point-free involution")
    return g


def _check_tau(tau):
    if not tau > 0:
        raise ValueError(f"temperature must be > 0, got {tau}")


def _contrastive(H, pos, tau, log_w=None, log_w_anchor=None):
    H = dc.as_tensor(H)
    n = H.shape[0]
    sim = dc.scale(dc.matmul(H, dc.transpose(H)), 1.0 / tau)
    off_diag = ~np.eye(n, dtype=bool)
    logits = sim if log_w is None else dc.add(sim, log_w)
    lse = dc.logsumexp(logits, mask=off_diag)

    # mean over positives of s[i, p] as a fixed linear functional of sim
    avg = pos / pos.sum(axis=1, keepdims=True)
    pos_term = dc.sum(dc.mul(sim, avg), axis=1)

    per_anchor = dc.add(lse, dc.scale(pos_term, -1.0))
    if log_w_anchor is not None:
        per_anchor = dc.add(per_anchor, -log_w_anchor)
    return dc.sum(per_anchor)


def l_self(H, pairing, tau):
    """Self-supervised contrastive loss (NT-Xent style), summed over anchors."""
    _check_tau(tau)
    n = dc.as_tensor(H).shape[0]
    g = _check_pairing(pairing, n)
    pos = np.zeros((n, n), dtype=bool)
    pos[np.arange(n), g] = True
    return _contrastive(H, pos, tau)


def l_scl(H, labels, pairing, tau):
    """Supervised contrastive loss; denominators include positives."""
    _check_tau(tau)
    return _contrastive(H, positive_mask(labels, pairing), tau)


def l_lcl(H, labels, pairing, weights, tau):
    """Label-aware contrastive loss.

    ``weights`` is the ``N x C`` matrix of weighting-network class
    confidences.  It is treated as a constant and floored at ``1e-8``.
    """
    _check_tau(tau)
    labels = np.asarray(labels)
    w = weights.values if isinstance(weights, dc.Tensor) else np.asarray(weights, dtype=np.float64)
    if w.ndim != 2 or w.shape[0] != len(labels):
        raise ValueError(f"weights shape {w.shape} does not match {len(labels)} samples")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite and non-negative")
    if labels.max(initial=0) >= w.shape[1]:
        raise ValueError("label id exceeds weight matrix width")
    log_w = np.log(np.maximum(w, WEIGHT_FLOOR))
    pair_log_w = log_w[:, labels]  # [i, k] -> log w[i, y_k]
    anchor_log_w = np.diagonal(pair_log_w).copy()
    return _contrastive(H, positive_mask(labels, pairing), tau, pair_log_w, anchor_log_w)


def cross_entropy(logits, labels):
    """Mean negative log-likelihood of ``labels`` under row-softmax(logits)."""
    logits = dc.as_tensor(logits)
    labels = np.asarray(labels, dtype=np.int64)
    n, c = logits.shape
    if labels.shape != (n,):
        raise ValueError(f"{len(labels)} labels for {n} logit rows")
    if np.any(labels < 0) or np.any(labels >= c):
        raise ValueError("label out of range")
    onehot = np.zeros((n, c))
    onehot[np.arange(n), labels] = 1.0
    picked = dc.sum(dc.mul(logits, onehot), axis=1)
    return dc.mean(dc.add(dc.logsumexp(logits), dc.scale(picked, -1.0)))


def joint_objective(loss_w, loss_e, loss_lcl, alpha):
    """``alpha * (loss_w + loss_e) + (1 - alpha) * loss_lcl``."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    ce = dc.add(loss_w, loss_e)
    return dc.add(dc.scale(ce, alpha), dc.scale(loss_lcl, 1.0 - alpha))
