"""Tracing pipeline: from manifest + sources to a blended-trace store.

Each program draws exactly ``spec.attempts`` random inputs from its own
manifest-recorded seed (a fixed protocol keeps the kept-path set independent
of scheduling), executes them all, groups executions by path, and keeps the
first-discovered paths that collected at least ``n_eps`` concretes — capped
at ``u_max``, each blended from its first ``n_eps`` concretes.  A program is
dropped if any run faults or exceeds the step limit, or if no path reaches
``n_eps`` concretes.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ..minilang import InputConfig, MinilangError, StepLimit, execute, random_inputs
from ..model import ModelConfig, PackedProgram, Vocab, pack_program, state_tokens
from ..namer import split_subwords
from ..traces import (
    BlendedTrace,
    PathKey,
    build_blended,
    downsample_concretes,
    group_by_path,
    read_blended_store,
    select_min_coverage_set,
    write_blended_store,
)
from .corpus import CorpusSpec, DatasetManifest, DatasetError, load_sources

Coverage = dict[str, dict[PathKey, frozenset[tuple[int, bool]]]]


def input_config(spec: CorpusSpec) -> InputConfig:
    return InputConfig(
        int_low=spec.int_low,
        int_high=spec.int_high,
        array_min_len=spec.array_min_len,
        array_max_len=spec.array_max_len,
    )


def trace_program(
    program, spec: CorpusSpec, input_seed: int
) -> tuple[list[BlendedTrace], dict[PathKey, frozenset[tuple[int, bool]]]] | None:
    """(blended traces, per-path branch sets) or None if the program is dropped.

    Concretes sharing a path cover exactly the same branch arms, so one
    execution per kept path supplies its coverage.
    """
    limit = StepLimit(spec.max_steps)
    traces = []
    for bindings in random_inputs(program, spec.attempts, seed=input_seed, config=input_config(spec)):
        try:
            traces.append(execute(program, bindings, limit))
        except MinilangError:
            return None
    blended: list[BlendedTrace] = []
    branches: dict[PathKey, frozenset[tuple[int, bool]]] = {}
    for group in group_by_path(traces).values():
        if len(group) < spec.n_eps:
            continue
        bt = build_blended(group[: spec.n_eps], spec.n_eps)
        blended.append(bt)
        branches[bt.key] = group[0].covered
        if len(blended) == spec.u_max:
            break
    if not blended:
        return None
    return blended, branches


@dataclass(frozen=True)
class TraceReport:
    total: int
    kept: tuple[str, ...]
    dropped: tuple[str, ...]


def coverage_path_for(store_path: str | Path) -> Path:
    return Path(store_path).with_suffix(".coverage.json")


def write_coverage(path: str | Path, coverage: Coverage) -> None:
    payload = {
        program_id: {key: sorted([site, arm] for site, arm in cov) for key, cov in paths.items()}
        for program_id, paths in coverage.items()
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True) + "\n", encoding="utf-8")


def read_coverage(path: str | Path) -> Coverage:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return {
        program_id: {
            key: frozenset((int(site), bool(arm)) for site, arm in pairs)
            for key, pairs in paths.items()
        }
        for program_id, paths in raw.items()
    }


def trace_corpus(
    manifest: DatasetManifest,
    corpus_dir: str | Path,
    spec: CorpusSpec,
    store_path: str | Path,
) -> TraceReport:
    """Trace every manifest program; writes the store plus a coverage sidecar."""
    programs = load_sources(manifest, corpus_dir)
    kept: list[str] = []
    dropped: list[str] = []
    items: list[tuple[str, list[BlendedTrace]]] = []
    coverage: Coverage = {}
    for entry in manifest.entries:
        result = trace_program(programs[entry.program_id], spec, entry.input_seed)
        if result is None:
            dropped.append(entry.program_id)
            continue
        blended, branches = result
        kept.append(entry.program_id)
        items.append((entry.program_id, blended))
        coverage[entry.program_id] = branches
    write_blended_store(store_path, items)
    write_coverage(coverage_path_for(store_path), coverage)
    return TraceReport(len(manifest.entries), tuple(kept), tuple(dropped))


# --- trace reduction -----------------------------------------------------------


def reduce_store(
    store: dict[str, list[BlendedTrace]],
    keep_concretes: int,
    min_set: bool = False,
    seed: int = 0,
    coverage: Coverage | None = None,
) -> dict[str, list[BlendedTrace]]:
    """Fewer concretes per blended trace; optionally only min-coverage paths."""
    if min_set and coverage is None:
        raise ValueError("min-set reduction needs the coverage sidecar")
    reduced: dict[str, list[BlendedTrace]] = {}
    for program_id, blended in store.items():
        chosen = blended
        if min_set:
            path_branches = {bt.key: coverage[program_id][bt.key] for bt in blended}
            keep = set(select_min_coverage_set(path_branches))
            # a branch-free program selects nothing; keep its first path
            chosen = [bt for bt in blended if bt.key in keep] or blended[:1]
        reduced[program_id] = [
            downsample_concretes(bt, min(keep_concretes, bt.concrete_count), seed=seed)
            for bt in chosen
        ]
    return reduced


def execution_count(store: dict[str, list[BlendedTrace]]) -> int:
    """Total concrete executions a store's blended traces consume."""
    return sum(bt.concrete_count for blended in store.values() for bt in blended)


# --- packing for the model --------------------------------------------------------


def build_vocab(
    manifest: DatasetManifest,
    programs: dict,
    store: dict[str, list[BlendedTrace]],
    split: str = "train",
) -> Vocab:
    """Token vocabulary from one split only (training, by default)."""
    streams = []
    for entry in manifest.split(split):
        if entry.program_id not in store:
            continue
        program = programs[entry.program_id]
        streams.extend(st.tokens for st in program.statements)
        for bt in store[entry.program_id]:
            for pair in bt.pairs:
                streams.extend(state_tokens(s) for s in pair.states)
    if not streams:
        raise DatasetError(f"split {split!r} has no traced programs")
    return Vocab.build(streams)


def label_map(manifest: DatasetManifest) -> dict[str, int]:
    return {label: i for i, label in enumerate(manifest.labels)}


@dataclass(frozen=True)
class PackedSplit:
    programs: tuple[PackedProgram, ...]
    names: tuple[tuple[str, ...], ...]  # gold sub-words; empty for classify

    def __len__(self) -> int:
        return len(self.programs)


def pack_corpus(
    manifest: DatasetManifest,
    programs: dict,
    store: dict[str, list[BlendedTrace]],
    vocab: Vocab,
    config: ModelConfig,
) -> dict[str, PackedSplit]:
    """Pack every traced program, keyed by split; drops untraced programs."""
    labels = label_map(manifest)
    out: dict[str, PackedSplit] = {}
    for split in ("train", "valid", "test"):
        packed: list[PackedProgram] = []
        names: list[tuple[str, ...]] = []
        for entry in manifest.split(split):
            if entry.program_id not in store:
                continue
            packed.append(
                pack_program(
                    programs[entry.program_id],
                    store[entry.program_id],
                    vocab,
                    config,
                    label=labels[entry.label],
                    program_id=entry.program_id,
                )
            )
            names.append(tuple(split_subwords(entry.label)))
        out[split] = PackedSplit(tuple(packed), tuple(names))
    return out


def load_store(store_path: str | Path) -> dict[str, list[BlendedTrace]]:
    path = Path(store_path)
    if not path.exists():
        raise DatasetError(f"no trace store at {path}")
    return read_blended_store(path)
