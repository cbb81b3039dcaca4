"""Classifier training: Adam with clipping, early stopping, metric history."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import nd
from ..nd import AdamHyper, AdamState, Tensor
from .config import ModelConfig, TrainConfig
from .network import forward_batch, init_params
from .pack import PackedProgram, make_batch


@dataclass(frozen=True)
class EpochMetrics:
    epoch: int
    train_loss: float
    valid_acc: float
    valid_f1: float


def macro_f1(gold: np.ndarray, pred: np.ndarray, n_labels: int) -> float:
    """Unweighted mean of per-class F1 over all labels."""
    scores = []
    for c in range(n_labels):
        tp = int(np.sum((pred == c) & (gold == c)))
        fp = int(np.sum((pred == c) & (gold != c)))
        fn = int(np.sum((pred != c) & (gold == c)))
        p = tp / (tp + fp) if tp + fp else 0.0
        r = tp / (tp + fn) if tp + fn else 0.0
        scores.append(2 * p * r / (p + r) if p + r else 0.0)
    return float(np.mean(scores))


def predict_batched(
    params: dict, config: ModelConfig, programs: list[PackedProgram], batch_size: int
) -> np.ndarray:
    """Argmax labels for a list of packed programs (batched forward)."""
    preds = np.empty(len(programs), dtype=np.int64)
    with nd.no_grad():
        for start in range(0, len(programs), batch_size):
            chunk = programs[start : start + batch_size]
            logits, _ = forward_batch(params, config, make_batch(chunk, config.n_eps))
            preds[start : start + len(chunk)] = np.argmax(logits.data, axis=1)
    return preds


def evaluate(
    params: dict, config: ModelConfig, programs: list[PackedProgram], batch_size: int = 32
) -> tuple[float, float, np.ndarray]:
    """(accuracy, macro-F1, predictions) on a packed dataset."""
    if not programs:
        raise ValueError("empty evaluation set")
    gold = np.array([p.label for p in programs], dtype=np.int64)
    pred = predict_batched(params, config, programs, batch_size)
    acc = float(np.mean(pred == gold))
    return acc, macro_f1(gold, pred, config.n_labels), pred


def train_classifier(
    train_set: list[PackedProgram],
    valid_set: list[PackedProgram],
    config: ModelConfig,
    train_config: TrainConfig,
    vocab_size: int,
    seed: int,
) -> tuple[dict[str, Tensor], list[EpochMetrics]]:
    """Train with Adam + global-norm clipping; early-stop on validation
    accuracy plateau (patience from config), returning the best parameters."""
    if not train_set or not valid_set:
        raise ValueError("empty dataset")
    params = init_params(config, vocab_size, seed)
    adam = AdamState(hyper=AdamHyper(lr=train_config.lr))
    history: list[EpochMetrics] = []
    best_acc = -1.0
    best_snapshot: dict[str, np.ndarray] = {}
    stale = 0

    for epoch in range(1, train_config.epochs + 1):
        order = nd.substream(seed, "shuffle", str(epoch)).permutation(len(train_set))
        loss_sum = 0.0
        for start in range(0, len(order), train_config.batch_size):
            chunk = [train_set[i] for i in order[start : start + train_config.batch_size]]
            batch = make_batch(chunk, config.n_eps)
            logits, _ = forward_batch(params, config, batch)
            loss = nd.cross_entropy_logits(logits, batch.labels)
            nd.zero_grads(params)
            nd.backward(loss)
            nd.clip_global_norm(params, train_config.clip_norm)
            nd.adam_step(params, adam)
            loss_sum += loss.item() * len(chunk)
        train_loss = loss_sum / len(train_set)

        valid_acc, valid_f1, _ = evaluate(params, config, valid_set, train_config.batch_size)
        history.append(EpochMetrics(epoch, train_loss, valid_acc, valid_f1))
        if valid_acc > best_acc:
            best_acc = valid_acc
            best_snapshot = {k: v.data.copy() for k, v in params.items()}
            stale = 0
        else:
            stale += 1
            if stale > train_config.patience:
                break

    for name, data in best_snapshot.items():
        params[name] = Tensor(data, requires_grad=True)
    return params, history


def metrics_csv(history: list[EpochMetrics]) -> str:
    lines = ["epoch,loss,acc,f1"]
    for m in history:
        lines.append(f"{m.epoch},{m.train_loss:.6f},{m.valid_acc:.6f},{m.valid_f1:.6f}")
    return "\n".join(lines) + "\n"
