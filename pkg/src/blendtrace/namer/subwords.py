"""Sub-word splitting, the name vocabulary, and sub-token P/R/F1.

A method name is scored as a case-insensitive *multiset* of sub-words, split
at underscores and camelCase boundaries, so ``diffCompute`` is a perfect
prediction for ``computeDiff`` while ``compute`` alone earns full precision
but half recall.  Corpus-level numbers micro-average the match/predicted/gold
counts across programs.
"""
from __future__ import annotations

import json
import re
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from hashlib import sha256

from ..model.vocab import BEGIN, END, UNK

NAME_SPECIALS = (BEGIN, END, UNK)

_SUBWORD = re.compile(r"[A-Z]+(?![a-z])|[A-Z][a-z0-9]*|[a-z0-9]+")


def split_subwords(name: str) -> list[str]:
    """Lower-cased sub-words of ``name``, split at ``_`` and camelCase humps."""
    parts: list[str] = []
    for chunk in name.split("_"):
        parts.extend(m.group(0).lower() for m in _SUBWORD.finditer(chunk))
    return parts


def _as_subwords(name: str | Sequence[str]) -> list[str]:
    if isinstance(name, str):
        return split_subwords(name)
    return [s.lower() for s in name]


def match_counts(predicted: str | Sequence[str], gold: str | Sequence[str]) -> tuple[int, int, int]:
    """(matched, predicted, gold) sub-word counts; matching is multiset."""
    pred = Counter(_as_subwords(predicted))
    ref = Counter(_as_subwords(gold))
    matched = sum((pred & ref).values())
    return matched, sum(pred.values()), sum(ref.values())


def _prf(matched: int, n_pred: int, n_gold: int) -> tuple[float, float, float]:
    if n_pred == 0 and n_gold == 0:
        return 1.0, 1.0, 1.0
    precision = matched / n_pred if n_pred else 0.0
    recall = matched / n_gold if n_gold else 0.0
    f1 = 2.0 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def subtoken_prf(
    predicted: str | Sequence[str], gold: str | Sequence[str]
) -> tuple[float, float, float]:
    """Precision/recall/F1 over case-insensitive sub-word multisets.

    An empty prediction scores 0 unless the gold name is also empty, in which
    case the triple is (1, 1, 1).  Order never matters.
    """
    return _prf(*match_counts(predicted, gold))


def corpus_prf(
    pairs: Iterable[tuple[str | Sequence[str], str | Sequence[str]]]
) -> tuple[float, float, float]:
    """Micro-averaged P/R/F1: counts are summed over (predicted, gold) pairs."""
    matched = n_pred = n_gold = 0
    for predicted, gold in pairs:
        m, p, g = match_counts(predicted, gold)
        matched, n_pred, n_gold = matched + m, n_pred + p, n_gold + g
    return _prf(matched, n_pred, n_gold)


@dataclass(frozen=True)
class NameVocab:
    """Sub-word → index table for the name decoder.

    Index 0..2 are the specials ``<begin>``, ``<end>``, ``<unk>``; the rest
    are the sorted sub-words of the gold names the vocabulary was built from,
    so every gold name decomposes fully in-vocabulary.
    """

    tokens: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.tokens[: len(NAME_SPECIALS)] != NAME_SPECIALS:
            raise ValueError(f"name vocabulary must start with {NAME_SPECIALS}")
        if len(set(self.tokens)) != len(self.tokens):
            raise ValueError("duplicate sub-words in name vocabulary")
        object.__setattr__(self, "index", {t: i for i, t in enumerate(self.tokens)})

    @classmethod
    def build(cls, names: Iterable[str]) -> "NameVocab":
        seen: set[str] = set()
        for name in names:
            seen.update(split_subwords(name))
        return cls(NAME_SPECIALS + tuple(sorted(seen - set(NAME_SPECIALS))))

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def begin_id(self) -> int:
        return self.index[BEGIN]

    @property
    def end_id(self) -> int:
        return self.index[END]

    @property
    def unk_id(self) -> int:
        return self.index[UNK]

    def encode(self, subword: str) -> int:
        return self.index.get(subword.lower(), self.unk_id)

    def decode(self, idx: int) -> str:
        return self.tokens[idx]

    def vocab_hash(self) -> str:
        return sha256("\x00".join(self.tokens).encode()).hexdigest()[:16]

    def to_json(self) -> str:
        return json.dumps({"tokens": list(self.tokens)})

    @classmethod
    def from_json(cls, text: str) -> "NameVocab":
        return cls(tuple(json.loads(text)["tokens"]))
