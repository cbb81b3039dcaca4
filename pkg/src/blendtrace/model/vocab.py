"""Shared token vocabulary over program tokens and runtime values.

One table serves both surfaces: a source token "2" and the runtime value 2
intentionally share an embedding slot.  Runtime values are rendered as short
token sequences (ints clamped to ±VALUE_CLAMP, bools as literal tokens,
arrays wrapped in bracket sentinels, unassigned locals as the bottom token).
"""
from __future__ import annotations

import hashlib
from typing import Iterable, Sequence

import numpy as np

from ..minilang import BOTTOM

PAD = "<pad>"
UNK = "<unk>"
BOTTOM_TOKEN = "⊥"
BEGIN = "<begin>"
END = "<end>"
SPECIALS = (PAD, UNK, BOTTOM_TOKEN, BEGIN, END)

VALUE_CLAMP = 64


def value_tokens(value) -> list[str]:
    """Render one runtime value as vocabulary tokens."""
    if value is BOTTOM:
        return [BOTTOM_TOKEN]
    if isinstance(value, bool):
        return ["true" if value else "false"]
    if isinstance(value, int):
        return [str(value)] if -VALUE_CLAMP <= value <= VALUE_CLAMP else [UNK]
    if isinstance(value, (tuple, list)):
        out = ["["]
        for item in value:
            out.extend(value_tokens(item))
        out.append("]")
        return out
    raise TypeError(f"not a runtime value: {value!r}")


def state_tokens(state: Sequence) -> list[str]:
    """Flatten a program state (values in declaration order) to tokens."""
    out: list[str] = []
    for value in state:
        out.extend(value_tokens(value))
    return out


class Vocab:
    """Dense, stable token→index map with fixed special slots."""

    def __init__(self, tokens: Sequence[str]):
        tokens = tuple(tokens)
        if tokens[: len(SPECIALS)] != SPECIALS:
            raise ValueError(f"vocabulary must start with the specials {SPECIALS}")
        if len(set(tokens)) != len(tokens):
            raise ValueError("vocabulary tokens must be unique")
        self.tokens = tokens
        self.index = {tok: i for i, tok in enumerate(tokens)}

    @classmethod
    def build(cls, token_streams: Iterable[Iterable[str]]) -> "Vocab":
        seen = set()
        for stream in token_streams:
            seen.update(stream)
        ordinary = sorted(seen - set(SPECIALS))
        return cls(SPECIALS + tuple(ordinary))

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def pad_id(self) -> int:
        return self.index[PAD]

    @property
    def unk_id(self) -> int:
        return self.index[UNK]

    @property
    def bottom_id(self) -> int:
        return self.index[BOTTOM_TOKEN]

    @property
    def begin_id(self) -> int:
        return self.index[BEGIN]

    @property
    def end_id(self) -> int:
        return self.index[END]

    def encode(self, token: str) -> int:
        return self.index.get(token, self.unk_id)

    def encode_all(self, tokens: Iterable[str]) -> np.ndarray:
        return np.array([self.encode(t) for t in tokens], dtype=np.int64)

    def decode(self, ids: Iterable[int]) -> list[str]:
        return [self.tokens[i] for i in ids]

    def vocab_hash(self) -> str:
        blob = "\n".join(self.tokens).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:16]

    def to_json(self) -> dict:
        return {"tokens": list(self.tokens)}

    @classmethod
    def from_json(cls, obj: dict) -> "Vocab":
        return cls(obj["tokens"])
