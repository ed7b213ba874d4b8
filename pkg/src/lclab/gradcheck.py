"""Finite-difference verification of every primitive, loss and the full network."""

from __future__ import annotations

import numpy as np

from . import diffcore as dc
from . import losses
from .encoder import classify, encode, init_network, pooling_matrix

TOLERANCE = 1e-4
STEP = 1e-5
MIN_NORM = 0.5
KINK_MARGIN = 1e-3


def _leaf(rng, shape, name, low=-2.0, high=2.0):
    return dc.Tensor(rng.uniform(low, high, size=shape), requires_grad=True, name=name)


def primitive_cases(rng):
    """(name, f, params) triples, one per differentiable primitive."""
    a = _leaf(rng, (3, 4), "a")
    b = _leaf(rng, (4, 2), "b")
    c = _leaf(rng, (3, 4), "c")
    bias = _leaf(rng, (4,), "bias")
    pos = _leaf(rng, (3, 4), "pos", 0.5, 2.0)
    rows = np.array([2, 0, 2, 1])
    weights = rng.normal(size=(3, 4))
    mask = rng.random((3, 4)) < 0.7
    mask[:, 0] = True

    def probe(t):
        # contract with fixed random weights so the gradient is not trivially uniform
        w = np.random.default_rng(1).normal(size=t.shape)
        return dc.sum(dc.mul(t, w))

    return [
        ("matmul", lambda p: probe(dc.matmul(p[0], p[1])), [a, b]),
        ("add", lambda p: probe(dc.add(p[0], p[1])), [c, bias]),
        ("mul", lambda p: probe(dc.mul(p[0], p[1])), [a, c]),
        ("scale", lambda p: probe(dc.scale(p[0], -1.7)), [a]),
        ("relu", lambda p: probe(dc.relu(p[0])), [a]),
        ("exp", lambda p: probe(dc.exp(p[0])), [a]),
        ("log", lambda p: probe(dc.log(p[0])), [pos]),
        ("sum", lambda p: probe(dc.sum(p[0], axis=1)), [a]),
        ("mean", lambda p: probe(dc.mean(p[0], axis=0)), [a]),
        ("transpose", lambda p: probe(dc.transpose(p[0])), [a]),
        ("softmax", lambda p: probe(dc.softmax(p[0])), [a]),
        ("logsumexp", lambda p: probe(dc.logsumexp(p[0], mask=mask)), [a]),
        ("l2_normalize", lambda p: probe(dc.l2_normalize(p[0])), [a]),
        ("gather_rows", lambda p: probe(dc.gather_rows(p[0], rows)), [a]),
        ("weighted", lambda p: dc.sum(dc.mul(p[0], weights)), [a]),
    ]


def _well_conditioned(net, seqs):
    enc, head = net.encoder, net.head
    flat, pool = pooling_matrix(seqs)
    pre = pool @ enc.embedding.values[flat] @ enc.w1.values + enc.b1.values
    out = np.maximum(pre, 0.0) @ enc.w2.values + enc.b2.values
    norms = np.sqrt((out * out).sum(axis=1, keepdims=True))
    if norms.min() < MIN_NORM:
        return False
    head_pre = (out / norms) @ head.w1.values + head.b1.values
    return min(np.abs(pre).min(), np.abs(head_pre).min()) >= KINK_MARGIN


def random_batch(rng, k, c, d, vocab=12, embed=6, hidden=8):
    """Small network plus a ``2K`` batch with twin pairing and labels.

    Draws are repeated until no ReLU input sits within ``KINK_MARGIN`` of
    zero and every pre-normalization representation has norm at least
    ``MIN_NORM``.  Near either point a 1e-5 central difference is itself
    inaccurate.
    """
    while True:
        net = init_network(rng, vocab, c, embed, hidden, d, head_hidden=hidden)
        seqs = [list(rng.integers(vocab, size=rng.integers(1, 5))) for _ in range(2 * k)]
        if _well_conditioned(net, seqs):
            break
    labels = np.concatenate([rng.integers(c, size=k)] * 2)
    idx = np.arange(2 * k)
    pairing = np.where(idx < k, idx + k, idx - k)
    W = rng.dirichlet(np.ones(c), size=2 * k)
    return net, seqs, labels, pairing, W


def _batch_cases(net, seqs, labels, pairing, W, tau, tag):
    enc = net.encoder.tensors()
    n_enc = len(enc)

    def reps(p):
        net.encoder.embedding, net.encoder.w1, net.encoder.b1, net.encoder.w2, net.encoder.b2 = p[:n_enc]
        return encode(net.encoder, seqs)

    def ce(p):
        H = reps(p)
        net.head.w1, net.head.b1, net.head.w2, net.head.b2 = p[n_enc:]
        return losses.cross_entropy(classify(net.head, H), labels)

    return [
        (f"l_self/{tag}", lambda p: losses.l_self(reps(p), pairing, tau), enc),
        (f"l_scl/{tag}", lambda p: losses.l_scl(reps(p), labels, pairing, tau), enc),
        (f"l_lcl/{tag}", lambda p: losses.l_lcl(reps(p), labels, pairing, W, tau), enc),
        (f"cross_entropy/{tag}", ce, net.tensors()),
    ]


def loss_cases(rng, n_batches=20, tau=0.3):
    """Per-batch loss closures over all encoder (and, for CE, head) parameters.

    Batches cycle through K in {2, 4}, C in {2, 4} and d in {4, 8}.
    """
    cases = []
    for b in range(n_batches):
        k = (2, 4)[b % 2]
        c = (2, 4)[(b // 2) % 2]
        d = (4, 8)[(b // 4) % 2]
        tag = f"batch{b}(K={k},C={c},d={d})"
        cases += _batch_cases(*random_batch(rng, k, c, d), tau, tag)
    return cases


def run_suite(seed=0, tolerance=TOLERANCE, n_batches=20, include_primitives=True):
    """Return ``[(name, max relative error, passed)]`` for the whole suite."""
    rng = np.random.default_rng(seed)
    cases = primitive_cases(rng) if include_primitives else []
    cases += loss_cases(rng, n_batches)
    results = []
    for name, f, params in cases:
        report = dc.finite_diff_check(f, params, step=STEP, tolerance=tolerance,
                                      rng=np.random.default_rng(seed))
        results.append((name, report.worst, report.passed))
    return results
