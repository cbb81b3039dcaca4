"""Central finite differences — the independent oracle for backward passes.

The checker only ever calls *forward* computations, so it stays independent
of the closure code it is validating.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

from .tensor import Tensor, backward


def numeric_gradient(f: Callable[[], float], x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Elementwise central differences of scalar-valued ``f`` wrt ``x`` in place."""
    grad = np.zeros_like(x)
    flat = x.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        keep = flat[i]
        flat[i] = keep + h
        hi = f()
        flat[i] = keep - h
        lo = f()
        flat[i] = keep
        gflat[i] = (hi - lo) / (2.0 * h)
    return grad


def relative_error(a: np.ndarray, b: np.ndarray, floor: float = 1e-6) -> float:
    denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)
    return float((np.abs(a - b) / denom).max())


def max_gradcheck_error(
    build_loss: Callable[[], Tensor],
    params: dict[str, Tensor],
    h: float = 1e-5,
) -> float:
    """Max elementwise relative error between autodiff and finite differences.

    ``build_loss`` must be a pure function of ``params[...]`` ``.data`` so it
    can be re-evaluated under perturbation.
    """
    for p in params.values():
        p.grad = None
    loss = build_loss()
    backward(loss)

    worst = 0.0
    for name in sorted(params):
        p = params[name]
        analytic = p.grad if p.grad is not None else np.zeros_like(p.data)
        numeric = numeric_gradient(lambda: build_loss().item(), p.data, h=h)
        worst = max(worst, relative_error(analytic, numeric))
    return worst
