"""Model and training configuration records."""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass

ABLATIONS = ("full", "static_only", "dynamic_only", "no_attention")
CELLS = ("tanh", "gru")


@dataclass(frozen=True)
class ModelConfig:
    """Architecture hyperparameters.

    ``ablation`` selects what the fusion layer sees: ``full`` attends over the
    statement encoding plus all state encodings, ``static_only`` keeps just the
    statement encoding, ``dynamic_only`` attends over state encodings alone,
    and ``no_attention`` averages all encodings with uniform weights.
    """

    n_labels: int
    d_embed: int = 100
    d_hidden: int = 100
    n_eps: int = 5
    ablation: str = "full"
    cell: str = "tanh"  # swap to "gru" if tanh training is unstable
    max_steps: int = 200  # ordered pairs per blended trace
    max_paths: int = 18  # blended traces per program

    def __post_init__(self):
        if self.n_labels < 1:
            raise ValueError("n_labels must be positive")
        for field in ("d_embed", "d_hidden", "n_eps", "max_steps", "max_paths"):
            if getattr(self, field) < 1:
                raise ValueError(f"{field} must be positive")
        if self.ablation not in ABLATIONS:
            raise ValueError(f"ablation must be one of {ABLATIONS}, got {self.ablation!r}")
        if self.cell not in CELLS:
            raise ValueError(f"cell must be one of {CELLS}, got {self.cell!r}")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 30
    batch_size: int = 16
    lr: float = 1e-3
    patience: int = 5
    clip_norm: float = 5.0

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be positive")
        if self.lr <= 0 or self.clip_norm <= 0:
            raise ValueError("lr and clip_norm must be positive")
        if self.patience < 0:
            raise ValueError("patience must be non-negative")


def config_fingerprint(config: ModelConfig, vocab_hash: str = "") -> str:
    """Stable hash binding a checkpoint to its architecture and vocabulary."""
    payload = {"model": asdict(config), "vocab": vocab_hash}
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]
