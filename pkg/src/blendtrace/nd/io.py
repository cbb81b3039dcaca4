"""Checkpoint format: named float64 tensors + config hash + RNG seed.

Layout (all little-endian):

    magic `NDCKPT1\\n`
    8-byte header length
    header JSON: {"config_hash", "seed", "tensors": [{"name", "shape"}, ...]}
    raw float64 buffers concatenated in header order (names sorted)

The header's tensor list is sorted by name and the JSON is dumped with sorted
keys and no whitespace variance, so identical params + config + seed produce a
byte-identical file.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .tensor import Tensor

MAGIC = b"NDCKPT1\n"


class CheckpointError(ValueError):
    pass


def save_checkpoint(
    path: str | Path,
    tensors: dict[str, Tensor | np.ndarray],
    config_hash: str,
    seed: int,
) -> None:
    arrays = {
        name: (t.data if isinstance(t, Tensor) else np.asarray(t, dtype=np.float64))
        for name, t in tensors.items()
    }
    names = sorted(arrays)
    header = {
        "config_hash": config_hash,
        "seed": int(seed),
        "tensors": [{"name": n, "shape": list(arrays[n].shape)} for n in names],
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(len(blob).to_bytes(8, "little"))
        fh.write(blob)
        for n in names:
            fh.write(np.ascontiguousarray(arrays[n], dtype="<f8").tobytes())


def load_checkpoint(path: str | Path) -> tuple[dict[str, np.ndarray], str, int]:
    with open(path, "rb") as fh:
        if fh.read(len(MAGIC)) != MAGIC:
            raise CheckpointError(f"{path}: not a checkpoint file")
        size = int.from_bytes(fh.read(8), "little")
        header = json.loads(fh.read(size).decode("utf-8"))
        arrays: dict[str, np.ndarray] = {}
        for entry in header["tensors"]:
            shape = tuple(entry["shape"])
            count = int(np.prod(shape)) if shape else 1
            buf = fh.read(count * 8)
            if len(buf) != count * 8:
                raise CheckpointError(f"{path}: truncated tensor {entry['name']}")
            arrays[entry["name"]] = np.frombuffer(buf, dtype="<f8").reshape(shape).copy()
    return arrays, header["config_hash"], int(header["seed"])
