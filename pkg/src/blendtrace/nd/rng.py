"""Seed plumbing: every random draw flows from one root seed via named substreams.

``substream_seed(root, "init")`` hashes the root together with the stream name,
so corpora, inputs, parameter init, and batching each get an independent,
reproducible generator without any global RNG state.
"""
from __future__ import annotations

import hashlib

import numpy as np


def substream_seed(root: int, *names: str | int) -> int:
    """Derive a 64-bit seed for the named substream of ``root``."""
    tag = f"{int(root)}|" + "/".join(str(n) for n in names)
    digest = hashlib.sha256(tag.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def substream(root: int, *names: str | int) -> np.random.Generator:
    """A fresh generator for the named substream of ``root``."""
    return np.random.default_rng(substream_seed(root, *names))


def init_uniform(rng: np.random.Generator, shape, scale: float = 0.08) -> np.ndarray:
    """Parameter initialization: uniform in [-scale, scale]."""
    return rng.uniform(-scale, scale, size=shape).astype(np.float64)
