"""Symbolic / state / blended trace model.

An execution trace projects two ways: the *symbolic* trace keeps the executed
statement sequence (the path), the *state* trace keeps the state sequence.
Executions sharing a path zip into one *blended* trace: a sequence of ordered
pairs (statement-id, states-at-that-step-across-concretes).

Paths are identified by a PathKey — a hash of the statement-id sequence — and
kept in discovery order throughout.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .minilang import ExecutionTrace
from .minilang.io import value_from_json, value_to_json

PathKey = str


def path_key(statement_ids: Sequence[int]) -> PathKey:
    """Canonical 128-bit hash of a statement-id sequence."""
    h = hashlib.sha256()
    for sid in statement_ids:
        h.update(int(sid).to_bytes(8, "little", signed=False))
    return h.hexdigest()[:32]


@dataclass(frozen=True)
class SymbolicTrace:
    key: PathKey
    statement_ids: tuple[int, ...]


@dataclass(frozen=True)
class StateTrace:
    initial_state: tuple
    states: tuple[tuple, ...]  # one post-state per executed statement


@dataclass(frozen=True)
class OrderedPair:
    statement_id: int
    states: tuple[tuple, ...]  # one state per concrete execution


@dataclass(frozen=True)
class BlendedTrace:
    key: PathKey
    pairs: tuple[OrderedPair, ...]

    @property
    def concrete_count(self) -> int:
        return len(self.pairs[0].states) if self.pairs else 0

    @property
    def statement_ids(self) -> tuple[int, ...]:
        return tuple(p.statement_id for p in self.pairs)


class TraceModelError(ValueError):
    pass


# --- projections --------------------------------------------------------------


def project_symbolic(trace: ExecutionTrace) -> SymbolicTrace:
    sids = trace.statement_ids
    if not sids:
        raise TraceModelError("cannot project an empty trace")
    return SymbolicTrace(key=path_key(sids), statement_ids=sids)


def project_states(trace: ExecutionTrace) -> StateTrace:
    if not trace.steps:
        raise TraceModelError("cannot project an empty trace")
    return StateTrace(
        initial_state=trace.initial_state,
        states=tuple(state for _, state in trace.steps),
    )


# --- grouping / blending --------------------------------------------------------


def group_by_path(traces: Iterable[ExecutionTrace]) -> dict[PathKey, list[ExecutionTrace]]:
    """Bucket executions by path, keys in discovery order."""
    groups: dict[PathKey, list[ExecutionTrace]] = {}
    for trace in traces:
        groups.setdefault(path_key(trace.statement_ids), []).append(trace)
    return groups


def build_blended(concretes: Sequence[ExecutionTrace], n_eps: int) -> BlendedTrace:
    """Zip the first ``n_eps`` same-path executions into a blended trace."""
    if n_eps <= 0:
        raise TraceModelError("n_eps must be positive")
    if len(concretes) < n_eps:
        raise TraceModelError(f"need {n_eps} concrete executions, have {len(concretes)}")
    chosen = concretes[:n_eps]
    sids = chosen[0].statement_ids
    for other in chosen[1:]:
        if other.statement_ids != sids:
            raise TraceModelError("executions do not share a path")
    pairs = tuple(
        OrderedPair(
            statement_id=sid,
            states=tuple(trace.steps[j][1] for trace in chosen),
        )
        for j, sid in enumerate(sids)
    )
    return BlendedTrace(key=path_key(sids), pairs=pairs)


def downsample_concretes(bt: BlendedTrace, k: int, seed: int) -> BlendedTrace:
    """Keep ``k`` concrete columns, chosen uniformly at random (seeded).

    Column order is preserved; ``k`` equal to the current count returns the
    trace unchanged.
    """
    count = bt.concrete_count
    if not 1 <= k <= count:
        raise TraceModelError(f"k={k} out of range for {count} concretes")
    if k == count:
        return bt
    rng = np.random.default_rng(seed)
    cols = np.sort(rng.choice(count, size=k, replace=False))
    pairs = tuple(
        OrderedPair(p.statement_id, tuple(p.states[c] for c in cols)) for p in bt.pairs
    )
    return BlendedTrace(key=bt.key, pairs=pairs)


# --- coverage-minimal path selection ---------------------------------------------


def select_min_coverage_set(
    path_branches: dict[PathKey, frozenset[tuple[int, bool]]],
) -> list[PathKey]:
    """Greedy set cover over branches; ties break toward earliest discovery.

    ``path_branches`` must iterate in discovery order (insertion order).
    Returns the chosen keys in selection order; covers the union of all
    given paths' branches.
    """
    keys = list(path_branches)
    remaining = set().union(*path_branches.values()) if path_branches else set()
    chosen: list[PathKey] = []
    available = set(keys)
    while remaining:
        best_key = None
        best_gain = 0
        for key in keys:  # discovery order makes ties deterministic
            if key not in available:
                continue
            gain = len(path_branches[key] & remaining)
            if gain > best_gain:
                best_gain = gain
                best_key = key
        if best_key is None:
            break  # nothing left can add coverage
        chosen.append(best_key)
        available.discard(best_key)
        remaining -= path_branches[best_key]
    return chosen


# --- blended store (JSONL) ---------------------------------------------------------


def blended_to_json(program_id: str, traces: Sequence[BlendedTrace]) -> dict:
    return {
        "program_id": program_id,
        "paths": [
            {
                "path_key": bt.key,
                "stmt_ids": list(bt.statement_ids),
                "concretes": [
                    [[value_to_json(v) for v in pair.states[c]] for pair in bt.pairs]
                    for c in range(bt.concrete_count)
                ],
            }
            for bt in traces
        ],
    }


def blended_from_json(record: dict) -> tuple[str, list[BlendedTrace]]:
    traces = []
    for entry in record["paths"]:
        sids = [int(s) for s in entry["stmt_ids"]]
        concretes = entry["concretes"]
        pairs = tuple(
            OrderedPair(
                statement_id=sid,
                states=tuple(
                    tuple(value_from_json(v) for v in concrete[j]) for concrete in concretes
                ),
            )
            for j, sid in enumerate(sids)
        )
        traces.append(BlendedTrace(key=entry["path_key"], pairs=pairs))
    return record["program_id"], traces


def write_blended_store(
    path: str | Path, items: Iterable[tuple[str, Sequence[BlendedTrace]]]
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for program_id, traces in items:
            fh.write(json.dumps(blended_to_json(program_id, traces), sort_keys=True))
            fh.write("\n")


def read_blended_store(path: str | Path) -> dict[str, list[BlendedTrace]]:
    out: dict[str, list[BlendedTrace]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            program_id, traces = blended_from_json(json.loads(line))
            out[program_id] = traces
    return out
