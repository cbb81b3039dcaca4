"""Dense float64 tensors with reverse-mode gradient tracking.

The graph is taped implicitly: every op returns a fresh ``Tensor`` whose
``_backward`` closure knows how to push an incoming cotangent to the op's
inputs.  ``backward(loss)`` walks the graph once in reverse topological
order, accumulating per-node cotangents in a scratch table and summing the
final results into the ``.grad`` of leaf tensors, so repeated calls to
``backward`` add up (never double-count interior contributions).

All data is float64; integer index arrays ride along as plain numpy arrays.
"""
from __future__ import annotations

import contextlib
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Tensor",
    "no_grad",
    "grad_enabled",
    "backward",
    "add",
    "sub",
    "mul",
    "neg",
    "matmul",
    "tanh",
    "sigmoid",
    "softmax",
    "cross_entropy_logits",
    "tsum",
    "tmean",
    "tmax",
    "max_elementwise",
    "concat",
    "stack",
    "take_rows",
    "narrow",
    "reshape",
]

_grad_enabled = True


@contextlib.contextmanager
def no_grad():
    """Disable graph construction inside the block (fast inference)."""
    global _grad_enabled
    prev = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = prev


def grad_enabled() -> bool:
    return _grad_enabled


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False):
        if isinstance(data, Tensor):
            data = data.data
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = bool(requires_grad)
        self._parents: tuple[Tensor, ...] = ()
        self._backward: Callable[[np.ndarray], list[tuple[Tensor, np.ndarray]]] | None = None

    # --- convenience -----------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def item(self) -> float:
        return float(self.data.reshape(()))

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    # Operator sugar (thin wrappers over the module-level ops).
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)


def _wrap(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _make(data: np.ndarray, parents: Sequence[Tensor], backward_fn) -> Tensor:
    out = Tensor(data)
    if _grad_enabled and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward_fn
    return out


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum ``g`` back down to ``shape`` after a broadcast op."""
    if g.shape == shape:
        return g
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


# --- the backward engine --------------------------------------------------


def backward(loss: Tensor) -> None:
    """Reverse-mode sweep from a scalar loss.

    Accumulates into ``.grad`` of every requires-grad *leaf* reached from
    ``loss``; calling again sums another full pass into those ``.grad``s.
    """
    if loss.data.size != 1:
        raise ValueError("backward() requires a scalar loss")

    # Iterative topological sort (graphs can be thousands of nodes deep).
    topo: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(loss, False)]
    while stack:
        node, processed = stack.pop()
        if processed:
            topo.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if parent.requires_grad and id(parent) not in seen:
                stack.append((parent, False))

    cotangents: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    for node in reversed(topo):
        g = cotangents.pop(id(node), None)
        if g is None:
            continue
        if node._backward is None:
            node.grad = g if node.grad is None else node.grad + g
            continue
        for parent, pg in node._backward(g):
            if not parent.requires_grad:
                continue
            held = cotangents.get(id(parent))
            cotangents[id(parent)] = pg if held is None else held + pg


# --- elementwise / arithmetic ops ------------------------------------------


def add(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    out = a.data + b.data

    def back(g):
        return [(a, _unbroadcast(g, a.data.shape)), (b, _unbroadcast(g, b.data.shape))]

    return _make(out, (a, b), back)


def sub(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    out = a.data - b.data

    def back(g):
        return [(a, _unbroadcast(g, a.data.shape)), (b, _unbroadcast(-g, b.data.shape))]

    return _make(out, (a, b), back)


def mul(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    out = a.data * b.data

    def back(g):
        return [
            (a, _unbroadcast(g * b.data, a.data.shape)),
            (b, _unbroadcast(g * a.data, b.data.shape)),
        ]

    return _make(out, (a, b), back)


def neg(a) -> Tensor:
    a = _wrap(a)
    return _make(-a.data, (a,), lambda g: [(a, -g)])


def matmul(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    if a.data.ndim != 2 or b.data.ndim != 2:
        raise ValueError("matmul supports 2-D operands only")
    out = a.data @ b.data

    def back(g):
        return [(a, g @ b.data.T), (b, a.data.T @ g)]

    return _make(out, (a, b), back)


def tanh(a) -> Tensor:
    a = _wrap(a)
    t = np.tanh(a.data)
    return _make(t, (a,), lambda g: [(a, g * (1.0 - t * t))])


def sigmoid(a) -> Tensor:
    a = _wrap(a)
    s = 1.0 / (1.0 + np.exp(-np.clip(a.data, -500.0, 500.0)))
    return _make(s, (a,), lambda g: [(a, g * s * (1.0 - s))])


def softmax(a, axis: int = -1) -> Tensor:
    """Numerically-stable softmax along ``axis``."""
    a = _wrap(a)
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    s = e / e.sum(axis=axis, keepdims=True)

    def back(g):
        dot = (g * s).sum(axis=axis, keepdims=True)
        return [(a, (g - dot) * s)]

    return _make(s, (a,), back)


def cross_entropy_logits(logits, labels) -> Tensor:
    """Mean cross-entropy between ``softmax(logits)`` rows and integer labels."""
    logits = _wrap(logits)
    labels = np.asarray(labels, dtype=np.int64)
    if logits.data.ndim != 2 or labels.ndim != 1 or labels.shape[0] != logits.data.shape[0]:
        raise ValueError("cross_entropy_logits expects [B, K] logits and [B] labels")
    n = logits.data.shape[0]
    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=1)) + logits.data.max(axis=1)
    gold = logits.data[np.arange(n), labels]
    out = np.asarray((lse - gold).mean())

    def back(g):
        p = np.exp(shifted)
        p /= p.sum(axis=1, keepdims=True)
        p[np.arange(n), labels] -= 1.0
        return [(logits, (float(g) / n) * p)]

    return _make(out, (logits,), back)


# --- reductions -------------------------------------------------------------


def tsum(a, axis: int | None = None, keepdims: bool = False) -> Tensor:
    a = _wrap(a)
    out = a.data.sum(axis=axis, keepdims=keepdims)

    def back(g):
        if axis is None:
            return [(a, np.full(a.data.shape, g if np.isscalar(g) else g.reshape(())))]
        gg = g if keepdims else np.expand_dims(g, axis)
        return [(a, np.broadcast_to(gg, a.data.shape).copy())]

    return _make(out, (a,), back)


def tmean(a, axis: int | None = None, keepdims: bool = False) -> Tensor:
    a = _wrap(a)
    out = a.data.mean(axis=axis, keepdims=keepdims)
    count = a.data.size if axis is None else a.data.shape[axis]

    def back(g):
        if axis is None:
            return [(a, np.full(a.data.shape, float(g.reshape(())) / count))]
        gg = g if keepdims else np.expand_dims(g, axis)
        return [(a, np.broadcast_to(gg, a.data.shape) / count)]

    return _make(out, (a,), back)


def tmax(a, axis: int, keepdims: bool = False) -> Tensor:
    """Max along an axis; gradient routes only to the first argmax per slice."""
    a = _wrap(a)
    out = a.data.max(axis=axis, keepdims=keepdims)
    arg = np.argmax(a.data, axis=axis)  # first occurrence on ties

    def back(g):
        gx = np.zeros_like(a.data)
        gg = g if keepdims else np.expand_dims(g, axis)
        np.put_along_axis(gx, np.expand_dims(arg, axis), gg, axis=axis)
        return [(a, gx)]

    return _make(out, (a,), back)


def max_elementwise(tensors: Sequence[Tensor]) -> Tensor:
    """Elementwise maximum of same-shape tensors (ties -> first input)."""
    if not tensors:
        raise ValueError("max_elementwise of no tensors")
    return tmax(stack(list(tensors), axis=0), axis=0)


# --- shape / gather ---------------------------------------------------------


def concat(tensors: Sequence, axis: int = 0) -> Tensor:
    ts = [_wrap(t) for t in tensors]
    out = np.concatenate([t.data for t in ts], axis=axis)
    sizes = [t.data.shape[axis] for t in ts]
    offsets = np.cumsum([0] + sizes)

    def back(g):
        grads = []
        for t, lo, hi in zip(ts, offsets[:-1], offsets[1:]):
            idx = [slice(None)] * g.ndim
            idx[axis] = slice(lo, hi)
            grads.append((t, g[tuple(idx)]))
        return grads

    return _make(out, ts, back)


def stack(tensors: Sequence, axis: int = 0) -> Tensor:
    ts = [_wrap(t) for t in tensors]
    out = np.stack([t.data for t in ts], axis=axis)

    def back(g):
        return [(t, np.take(g, i, axis=axis)) for i, t in enumerate(ts)]

    return _make(out, ts, back)


def take_rows(a, indices) -> Tensor:
    """Gather rows of a 2-D tensor; backward scatter-adds (deterministically)."""
    a = _wrap(a)
    if a.data.ndim != 2:
        raise ValueError("take_rows expects a 2-D tensor")
    idx = np.asarray(indices, dtype=np.int64)
    if idx.ndim != 1:
        raise ValueError("take_rows expects a 1-D index array")
    out = a.data[idx]
    n_rows, width = a.data.shape

    def back(g):
        # bincount-based scatter-add: much faster than np.add.at and
        # deterministic (single accumulation order).
        flat = (idx[:, None] * width + np.arange(width)[None, :]).ravel()
        acc = np.bincount(flat, weights=g.ravel(), minlength=n_rows * width)
        return [(a, acc.reshape(n_rows, width))]

    return _make(out, (a,), back)


def narrow(a, start: int, length: int, axis: int = 0) -> Tensor:
    """Contiguous slice along ``axis``."""
    a = _wrap(a)
    idx = [slice(None)] * a.data.ndim
    idx[axis] = slice(start, start + length)
    out = a.data[tuple(idx)]

    def back(g):
        gx = np.zeros_like(a.data)
        gx[tuple(idx)] = g
        return [(a, gx)]

    return _make(out, (a,), back)


def reshape(a, shape) -> Tensor:
    a = _wrap(a)
    out = a.data.reshape(shape)
    orig = a.data.shape
    return _make(out, (a,), lambda g: [(a, g.reshape(orig))])
