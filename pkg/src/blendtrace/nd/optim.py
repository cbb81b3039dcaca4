"""Adam optimizer and global-norm gradient clipping for named parameter dicts."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .tensor import Tensor


@dataclass
class AdamHyper:
    lr: float = 0.0001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


@dataclass
class AdamState:
    """First/second-moment estimates plus the shared step counter."""

    hyper: AdamHyper = field(default_factory=AdamHyper)
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(params: dict[str, Tensor], state: AdamState) -> None:
    """One bias-corrected Adam update, in place, over sorted parameter names."""
    h = state.hyper
    state.step += 1
    bc1 = 1.0 - h.beta1**state.step
    bc2 = 1.0 - h.beta2**state.step
    for name in sorted(params):
        p = params[name]
        g = p.grad if p.grad is not None else np.zeros_like(p.data)
        m = state.m.get(name)
        v = state.v.get(name)
        if m is None:
            m = np.zeros_like(p.data)
            v = np.zeros_like(p.data)
        m = h.beta1 * m + (1.0 - h.beta1) * g
        v = h.beta2 * v + (1.0 - h.beta2) * (g * g)
        state.m[name] = m
        state.v[name] = v
        p.data -= h.lr * (m / bc1) / (np.sqrt(v / bc2) + h.eps)


def global_grad_norm(params: dict[str, Tensor]) -> float:
    total = 0.0
    for name in sorted(params):
        g = params[name].grad
        if g is not None:
            total += float((g * g).sum())
    return math.sqrt(total)


def clip_global_norm(params: dict[str, Tensor], max_norm: float = 5.0) -> float:
    """Scale all grads so their joint L2 norm is at most ``max_norm``.

    Returns the pre-clip norm.
    """
    norm = global_grad_norm(params)
    if norm > max_norm and norm > 0.0:
        scale = max_norm / norm
        for p in params.values():
            if p.grad is not None:
                p.grad *= scale
    return norm


def zero_grads(params: dict[str, Tensor]) -> None:
    for p in params.values():
        p.grad = None
