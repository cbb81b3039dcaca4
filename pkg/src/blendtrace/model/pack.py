"""Index-packed programs and batches for the fused network forward.

Token sequences are deduplicated twice: identical statement token sequences
within a program are encoded once, and identical state token sequences across
a whole batch are encoded once.  Paths carry int64 index arrays into those
unique pools, so the expensive RNN encoders run only on distinct sequences.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..minilang import Program
from ..traces import BlendedTrace
from .config import ModelConfig
from .vocab import Vocab, state_tokens


@dataclass
class PackedProgram:
    program_id: str
    label: int
    stmt_seqs: list[np.ndarray]  # unique statement token ids, first-use order
    state_seqs: list[np.ndarray]  # unique state token ids, first-use order
    path_stmt_idx: list[np.ndarray]  # per path: [L] into stmt_seqs
    path_state_idx: list[np.ndarray]  # per path: [L, n_eps] into state_seqs


@dataclass
class PackedBatch:
    stmt_seqs: list[np.ndarray]  # batch-unique statement token sequences
    state_seqs: list[np.ndarray]  # batch-unique state token sequences
    path_stmt_idx: np.ndarray  # [P, L_max]
    path_state_idx: np.ndarray  # [P, L_max, n_eps]
    step_mask: np.ndarray  # [P, L_max] float64, 1.0 on real steps
    path_slices: list[tuple[int, int]]  # per program: (first path row, path count)
    labels: np.ndarray  # [B]

    @property
    def n_paths(self) -> int:
        return self.path_stmt_idx.shape[0]

    @property
    def n_programs(self) -> int:
        return len(self.path_slices)


def pack_program(
    program: Program,
    blended: list[BlendedTrace],
    vocab: Vocab,
    config: ModelConfig,
    label: int = 0,
    program_id: str | None = None,
) -> PackedProgram:
    """Encode one program's blended traces as index arrays.

    Keeps the first ``max_paths`` traces and the first ``max_steps`` ordered
    pairs of each; takes the first ``n_eps`` concrete states per pair.
    """
    program_id = program_id or program.name
    if not blended:
        raise ValueError(f"program {program_id!r} has no blended traces")
    stmt_pool: dict[tuple[int, ...], int] = {}
    state_pool: dict[tuple[int, ...], int] = {}
    stmt_seqs: list[np.ndarray] = []
    state_seqs: list[np.ndarray] = []
    path_stmt_idx: list[np.ndarray] = []
    path_state_idx: list[np.ndarray] = []

    def intern(pool, seqs, ids: np.ndarray) -> int:
        key = tuple(ids.tolist())
        slot = pool.get(key)
        if slot is None:
            slot = len(seqs)
            pool[key] = slot
            seqs.append(ids)
        return slot

    for bt in blended[: config.max_paths]:
        if bt.concrete_count < config.n_eps:
            raise ValueError(
                f"blended trace has {bt.concrete_count} concretes; config needs {config.n_eps}"
            )
        pairs = bt.pairs[: config.max_steps]
        srow = np.empty(len(pairs), dtype=np.int64)
        drow = np.empty((len(pairs), config.n_eps), dtype=np.int64)
        for j, pair in enumerate(pairs):
            tokens = program.statements[pair.statement_id].tokens
            srow[j] = intern(stmt_pool, stmt_seqs, vocab.encode_all(tokens))
            for e in range(config.n_eps):
                ids = vocab.encode_all(state_tokens(pair.states[e]))
                drow[j, e] = intern(state_pool, state_seqs, ids)
        path_stmt_idx.append(srow)
        path_state_idx.append(drow)

    return PackedProgram(
        program_id=program_id,
        label=label,
        stmt_seqs=stmt_seqs,
        state_seqs=state_seqs,
        path_stmt_idx=path_stmt_idx,
        path_state_idx=path_state_idx,
    )


def make_batch(programs: list[PackedProgram], n_eps: int) -> PackedBatch:
    """Merge packed programs, re-deduplicating sequences across the batch."""
    if not programs:
        raise ValueError("empty batch")
    stmt_pool: dict[tuple[int, ...], int] = {}
    state_pool: dict[tuple[int, ...], int] = {}
    stmt_seqs: list[np.ndarray] = []
    state_seqs: list[np.ndarray] = []

    def intern(pool, seqs, ids: np.ndarray) -> int:
        key = tuple(ids.tolist())
        slot = pool.get(key)
        if slot is None:
            slot = len(seqs)
            pool[key] = slot
            seqs.append(ids)
        return slot

    rows_stmt: list[np.ndarray] = []
    rows_state: list[np.ndarray] = []
    path_slices: list[tuple[int, int]] = []
    labels = np.empty(len(programs), dtype=np.int64)
    for b, packed in enumerate(programs):
        labels[b] = packed.label
        stmt_map = np.array(
            [intern(stmt_pool, stmt_seqs, ids) for ids in packed.stmt_seqs], dtype=np.int64
        )
        state_map = np.array(
            [intern(state_pool, state_seqs, ids) for ids in packed.state_seqs], dtype=np.int64
        )
        start = len(rows_stmt)
        for srow, drow in zip(packed.path_stmt_idx, packed.path_state_idx):
            if drow.shape[1] != n_eps:
                raise ValueError("inconsistent concrete count in batch")
            rows_stmt.append(stmt_map[srow])
            rows_state.append(state_map[drow])
        path_slices.append((start, len(packed.path_stmt_idx)))

    n_paths = len(rows_stmt)
    l_max = max(row.shape[0] for row in rows_stmt)
    path_stmt_idx = np.zeros((n_paths, l_max), dtype=np.int64)
    path_state_idx = np.zeros((n_paths, l_max, n_eps), dtype=np.int64)
    step_mask = np.zeros((n_paths, l_max), dtype=np.float64)
    for p, (srow, drow) in enumerate(zip(rows_stmt, rows_state)):
        length = srow.shape[0]
        path_stmt_idx[p, :length] = srow
        path_state_idx[p, :length] = drow
        step_mask[p, :length] = 1.0

    return PackedBatch(
        stmt_seqs=stmt_seqs,
        state_seqs=state_seqs,
        path_stmt_idx=path_stmt_idx,
        path_state_idx=path_state_idx,
        step_mask=step_mask,
        path_slices=path_slices,
        labels=labels,
    )
