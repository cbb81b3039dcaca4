"""Line-delimited JSON for execution traces.

One JSON object per executed trace:

    {"program_id": ..., "input": {...}, "steps": [{"stmt_id": i, "state": [...]}, ...],
     "branches": [[site, arm], ...]}

Values use JSON's own typing as the tag: ints are numbers, bools are
true/false, arrays are lists, and the ⊥ sentinel is null.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Iterable

from .interp import BOTTOM, ExecutionTrace
from .nodes import Program


def value_to_json(v) -> Any:
    if v is BOTTOM:
        return None
    if isinstance(v, bool):
        return v
    if isinstance(v, int):
        return int(v)
    if isinstance(v, (tuple, list)):
        return [int(x) for x in v]
    raise TypeError(f"unserializable trace value: {v!r}")


def value_from_json(v):
    if v is None:
        return BOTTOM
    if isinstance(v, bool):
        return v
    if isinstance(v, int):
        return v
    if isinstance(v, list):
        return tuple(int(x) for x in v)
    raise TypeError(f"unreadable trace value: {v!r}")


def trace_to_json(program_id: str, trace: ExecutionTrace) -> dict:
    return {
        "program_id": program_id,
        "input": {name: value_to_json(v) for name, v in sorted(trace.inputs.items())},
        "steps": [
            {"stmt_id": sid, "state": [value_to_json(v) for v in state]}
            for sid, state in trace.steps
        ],
        "branches": sorted([site, arm] for site, arm in trace.covered),
    }


def write_execution_traces(path: str | Path, items: Iterable[tuple[str, ExecutionTrace]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for program_id, trace in items:
            fh.write(json.dumps(trace_to_json(program_id, trace), sort_keys=True))
            fh.write("\n")


def read_execution_traces(path: str | Path) -> list[dict]:
    with open(path, "r", encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def rehydrate_trace(program: Program, record: dict) -> ExecutionTrace:
    """Rebuild an ExecutionTrace from its JSON record (needs the program for
    declaration order; the initial state is params + ⊥ locals)."""
    inputs = {name: value_from_json(v) for name, v in record["input"].items()}
    initial = []
    for name in program.variables:
        if name in inputs:
            v = inputs[name]
            initial.append(tuple(v) if isinstance(v, (list, tuple)) else v)
        else:
            initial.append(BOTTOM)
    trace = ExecutionTrace(initial_state=tuple(initial), inputs=inputs)
    trace.steps = [
        (int(step["stmt_id"]), tuple(value_from_json(v) for v in step["state"]))
        for step in record["steps"]
    ]
    trace.covered = frozenset((int(site), bool(arm)) for site, arm in record["branches"])
    return trace
