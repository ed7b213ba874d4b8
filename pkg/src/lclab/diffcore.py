"""Dense float64 tensors with reverse-mode gradients, a finite-difference
checker and the Adam optimizer.

Every primitive returns a new :class:`Tensor` whose ``_backward`` closure
pushes the upstream gradient into its parents.  ``backward`` walks the graph
in reverse topological order, then clears it so a second call fails loudly.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np


class Tensor:
    __slots__ = ("values", "grad", "requires_grad", "name", "_prev", "_backward", "_op", "_cleared")

    def __init__(self, values, requires_grad=False, name=None, _children=(), _op=""):
        self.values = np.array(values, dtype=np.float64)
        self.requires_grad = requires_grad
        self.name = name
        self.grad = None
        self._prev = tuple(_children)
        self._backward = None
        self._op = _op
        self._cleared = False

    @property
    def shape(self):
        return self.values.shape

    @property
    def ndim(self):
        return self.values.ndim

    def item(self):
        return float(self.values)

    def zero_grad(self):
        self.grad = None

    def _accumulate(self, g):
        g = np.asarray(g, dtype=np.float64)
        if self.grad is None:
            self.grad = g.copy()
        else:
            self.grad = self.grad + g

    def backward(self):
        """Propagate d(self)/d(leaf) into ``.grad`` of every reachable tensor."""
        if self._cleared:
            raise RuntimeError("backward called on a cleared graph")
        if self.values.size != 1:
            raise ValueError(f"backward needs a scalar, got shape {self.shape}")

        topo, seen = [], set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._prev:
                if id(parent) not in seen:
                    stack.append((parent, False))

        grads = {id(self): np.ones_like(self.values)}
        for node in reversed(topo):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node.requires_grad and not node._prev:
                node._accumulate(g)
            if node._backward is not None:
                for parent, pg in zip(node._prev, node._backward(g)):
                    if pg is None:
                        continue
                    key = id(parent)
                    grads[key] = grads[key] + pg if key in grads else pg

        for node in topo:
            if node._prev:
                node._prev = ()
                node._backward = None
                node._cleared = True

    def detach(self):
        return Tensor(self.values)

    # operator sugar
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, scale(as_tensor(other), -1.0))

    def __rsub__(self, other):
        return add(as_tensor(other), scale(self, -1.0))

    def __neg__(self):
        return scale(self, -1.0)

    def __mul__(self, other):
        if np.isscalar(other):
            return scale(self, other)
        return mul(self, other)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return matmul(self, other)

    def __repr__(self):
        return f"Tensor(shape={self.shape}, op={self._op!r}, requires_grad={self.requires_grad})"


def as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def _needs_graph(*ts):
    return any(t.requires_grad or t._prev for t in ts)


def _make(values, parents, backward, op):
    if not np.all(np.isfinite(values)):
        raise FloatingPointError(f"non-finite output from {op}")
    if _needs_graph(*parents):
        return Tensor(values, _children=parents, _op=op)._with(backward)
    return Tensor(values, _op=op)


def _with(self, backward):
    self._backward = backward
    return self


Tensor._with = _with


def _unbroadcast(g, shape):
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def matmul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ValueError(f"matmul shape mismatch: {a.shape} @ {b.shape}")
    return _make(a.values @ b.values, (a, b),
                 lambda g: (g @ b.values.T, a.values.T @ g), "matmul")


def add(a, b):
    a, b = as_tensor(a), as_tensor(b)
    try:
        out = a.values + b.values
    except ValueError as exc:
        raise ValueError(f"add shape mismatch: {a.shape} + {b.shape}") from exc
    return _make(out, (a, b),
                 lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)), "add")


def mul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    try:
        out = a.values * b.values
    except ValueError as exc:
        raise ValueError(f"mul shape mismatch: {a.shape} * {b.shape}") from exc
    return _make(out, (a, b),
                 lambda g: (_unbroadcast(g * b.values, a.shape),
                            _unbroadcast(g * a.values, b.shape)), "mul")


def scale(a, c):
    a = as_tensor(a)
    c = float(c)
    return _make(a.values * c, (a,), lambda g: (g * c,), "scale")


def relu(a):
    a = as_tensor(a)
    gate = (a.values > 0).astype(np.float64)
    return _make(a.values * gate, (a,), lambda g: (g * gate,), "relu")


def exp(a):
    a = as_tensor(a)
    out = np.exp(a.values)
    return _make(out, (a,), lambda g: (g * out,), "exp")


def log(a):
    a = as_tensor(a)
    if a.values.size == 0:
        raise ValueError("log of an empty tensor")
    if np.any(a.values <= 0):
        raise FloatingPointError("log of a non-positive value")
    return _make(np.log(a.values), (a,), lambda g: (g / a.values,), "log")


def sum(a, axis=None):
    a = as_tensor(a)
    out = a.values.sum(axis=axis)

    def backward(g):
        if axis is not None:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.shape).copy(),)

    return _make(out, (a,), backward, "sum")


def mean(a, axis=None):
    a = as_tensor(a)
    n = a.values.size if axis is None else a.shape[axis]
    if n == 0:
        raise ValueError("mean over an empty axis")
    return scale(sum(a, axis=axis), 1.0 / n)


def transpose(a):
    a = as_tensor(a)
    return _make(a.values.T.copy(), (a,), lambda g: (g.T,), "transpose")


def softmax(a):
    """Row softmax over the last axis."""
    a = as_tensor(a)
    if a.shape[-1] == 0:
        raise ValueError("softmax over an empty axis")
    z = a.values - a.values.max(axis=-1, keepdims=True)
    e = np.exp(z)
    out = e / e.sum(axis=-1, keepdims=True)

    def backward(g):
        return (out * (g - (g * out).sum(axis=-1, keepdims=True)),)

    return _make(out, (a,), backward, "softmax")


def logsumexp(a, mask=None):
    """Stabilized log-sum-exp over the last axis, restricted to ``mask`` if given.

    Every row must keep at least one entry.
    """
    a = as_tensor(a)
    if a.shape[-1] == 0:
        raise ValueError("logsumexp over an empty axis")
    keep = np.ones(a.shape, dtype=bool) if mask is None else np.broadcast_to(np.asarray(mask, dtype=bool), a.shape)
    if not np.all(keep.any(axis=-1)):
        raise ValueError("logsumexp row with no unmasked entries")
    x = np.where(keep, a.values, -np.inf)
    m = x.max(axis=-1, keepdims=True)
    e = np.where(keep, np.exp(x - m), 0.0)
    s = e.sum(axis=-1, keepdims=True)
    out = (m + np.log(s))[..., 0]
    p = e / s

    return _make(out, (a,), lambda g: (p * g[..., None],), "logsumexp")


def l2_normalize(a):
    """Scale each row (last axis) to unit Euclidean norm.

    All-zero rows are passed through as zeros with a warning.
    """
    a = as_tensor(a)
    norm = np.sqrt((a.values * a.values).sum(axis=-1, keepdims=True))
    zero = norm == 0
    if np.any(zero):
        warnings.warn("l2_normalize: zero vector left unnormalized", RuntimeWarning, stacklevel=2)
    safe = np.where(zero, 1.0, norm)
    out = np.where(zero, 0.0, a.values / safe)

    def backward(g):
        dot = (g * out).sum(axis=-1, keepdims=True)
        return (np.where(zero, 0.0, (g - out * dot) / safe),)

    return _make(out, (a,), backward, "l2_normalize")


def gather_rows(a, index):
    """Rows ``a[index]``; repeated indices accumulate in the backward pass."""
    a = as_tensor(a)
    index = np.asarray(index, dtype=np.int64)
    if index.size and (index.min() < 0 or index.max() >= a.shape[0]):
        raise IndexError("gather_rows index out of range")

    def backward(g):
        full = np.zeros_like(a.values)
        np.add.at(full, index, g)
        return (full,)

    return _make(a.values[index], (a,), backward, "gather_rows")


def dropout(a, p, rng, train=True):
    """Inverted dropout; identity when ``train`` is false or ``p`` is 0."""
    a = as_tensor(a)
    if not train or p == 0.0:
        return a
    if not 0.0 <= p < 1.0:
        raise ValueError(f"dropout probability must be in [0, 1), got {p}")
    keep = (rng.random(a.shape) >= p) / (1.0 - p)
    return _make(a.values * keep, (a,), lambda g: (g * keep,), "dropout")


# ---------------------------------------------------------------------------
# finite differences


@dataclass
class GradCheckReport:
    max_rel_error: dict
    tolerance: float

    @property
    def passed(self):
        return all(err < self.tolerance for err in self.max_rel_error.values())

    @property
    def worst(self):
        return max(self.max_rel_error.values(), default=0.0)


# below this magnitude a central difference is dominated by rounding noise
# (about eps * |f| / step), so the error is measured against the floor instead
GRAD_FLOOR = 1e-5


def _rel_error(analytic, numeric):
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), GRAD_FLOOR)


def finite_diff_check(f, params, step=1e-5, tolerance=1e-4, n_coords=50, rng=None):
    """Compare analytic gradients of ``f`` against central differences.

    ``f`` maps the list of parameter tensors to a scalar Tensor and must be
    deterministic.  Up to ``n_coords`` coordinates per block are probed
    (all of them if the block is smaller).  Returns a report keyed by
    parameter name (or position).
    """
    rng = np.random.default_rng(0) if rng is None else rng
    for p in params:
        p.requires_grad = True
        p.zero_grad()
    f(params).backward()
    analytic = [np.zeros(p.shape) if p.grad is None else p.grad.copy() for p in params]

    errors = {}
    for pos, p in enumerate(params):
        flat = p.values.reshape(-1)
        n = flat.size
        coords = np.arange(n) if n <= n_coords else rng.choice(n, size=n_coords, replace=False)
        worst = 0.0
        for c in coords:
            orig = flat[c]
            flat[c] = orig + step
            up = f(params).item()
            flat[c] = orig - step
            down = f(params).item()
            flat[c] = orig
            if not (np.isfinite(up) and np.isfinite(down)):
                raise FloatingPointError(f"non-finite f while perturbing block {p.name or pos}")
            numeric = (up - down) / (2 * step)
            worst = max(worst, _rel_error(analytic[pos].reshape(-1)[c], numeric))
        errors[p.name or str(pos)] = worst
    for p in params:
        p.zero_grad()
    return GradCheckReport(errors, tolerance)


# ---------------------------------------------------------------------------
# optimizer


@dataclass
class AdamState:
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-6
    weight_decay: float = 1e-2
    t: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)


def adam_step(state, params, grads=None):
    """One Adam update with bias correction and decoupled weight decay.

    ``params`` is a list of Tensors updated in place; ``grads`` defaults to
    their ``.grad`` (missing gradients count as zero).  A non-finite gradient
    aborts before anything is modified.
    """
    if grads is None:
        grads = [np.zeros(p.shape) if p.grad is None else p.grad for p in params]
    for i, (p, g) in enumerate(zip(params, grads)):
        if g.shape != p.shape:
            raise ValueError(f"gradient shape {g.shape} != parameter shape {p.shape}")
        if not np.all(np.isfinite(g)):
            raise FloatingPointError(f"non-finite gradient in block {p.name or i}")
    if not state.m:
        state.m = [np.zeros(p.shape) for p in params]
        state.v = [np.zeros(p.shape) for p in params]

    state.t += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1 ** state.t
    c2 = 1.0 - b2 ** state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if state.weight_decay:
            p.values -= state.lr * state.weight_decay * p.values
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p.values -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return params, state
