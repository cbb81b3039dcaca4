"""Name decoder: an attention RNN over blended-trace flow states.

The encoder is the same network that feeds the classifier; its program
embedding seeds the decoder state through a learned tanh bridge, and at every
emission step the a2 scorer rates *all* prefix flow states — every (path,
step) pair jointly — against the previous decoder state.  The softmax over
those scores yields one distribution per program; its weighted sum is the
context vector mixed into the decoder recurrence.  Decoding is greedy: start
from ``<begin>``, stop at ``<end>`` or ``max_len``.

Batched training pads each program's annotation set and masks the padding
with an additive -1e9 before the softmax, which underflows to exactly zero
weight.  Teacher forcing computes the cross-entropy only at real emission
steps by gathering their logit rows.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import nd
from ..nd import Tensor
from ..model.config import ModelConfig, TrainConfig
from ..model.network import (
    _cell_step,
    _rnn_param_names,
    encode_batch,
    encode_blended,
    init_params,
    pool_program,
)
from ..model.pack import PackedBatch, PackedProgram, make_batch
from ..model.vocab import Vocab
from .subwords import NameVocab, corpus_prf, subtoken_prf

MASK_BIAS = -1e9


def decoder_param_names(config: ModelConfig) -> list[str]:
    """Decoder-side parameter tensors, in creation order."""
    return (
        ["bridge", "dec_embed"]
        + _rnn_param_names("fd", config.cell)
        + ["a2_u", "a2_c", "a2_v", "out_proj"]
    )


def _decoder_param_shape(name: str, config: ModelConfig, name_vocab_size: int) -> tuple[int, int]:
    d_e, d_h = config.d_embed, config.d_hidden
    if name == "bridge":
        return (d_h, d_h)
    if name == "dec_embed":
        return (name_vocab_size, d_e)
    if name in ("a2_u", "a2_c"):
        return (d_h, d_h)
    if name == "a2_v":
        return (d_h, 1)
    if name == "out_proj":
        return (d_h, name_vocab_size)
    # decoder cell: input is sub-word embedding ⊕ context vector
    if name.endswith("w"):
        return (d_e + d_h, d_h)
    return (d_h, d_h)


def init_namer_params(
    config: ModelConfig, vocab_size: int, name_vocab_size: int, seed: int
) -> dict[str, Tensor]:
    """Encoder (without the classifier head) plus decoder, one flat dict."""
    params = init_params(config, vocab_size, seed, head=False)
    for name in decoder_param_names(config):
        rng = nd.substream(seed, "init", name)
        shape = _decoder_param_shape(name, config, name_vocab_size)
        params[name] = Tensor(nd.init_uniform(rng, shape), requires_grad=True)
    return params


# --- per-item reference API -------------------------------------------------


def attention_context(
    h_d_prev: Tensor, annotations: list[Tensor], params: dict
) -> tuple[Tensor, np.ndarray]:
    """Context vector over all annotations; returns (c_t [1, d], weights [A]).

    Scores are ``a2(h_d_prev ⊕ annotation)`` softmaxed jointly over every
    annotation, whichever path or step it came from.
    """
    if not annotations:
        raise ValueError("attention requires at least one annotation")
    ann = nd.concat(annotations, axis=0) if len(annotations) > 1 else annotations[0]
    scores = nd.tanh(ann @ params["a2_u"] + h_d_prev @ params["a2_c"]) @ params["a2_v"]
    alpha = nd.softmax(nd.reshape(scores, (1, len(annotations))), axis=1)
    c = alpha @ ann
    return c, alpha.data.ravel().copy()


def encode_program(
    program, blended, params: dict, config: ModelConfig, vocab: Vocab
) -> tuple[Tensor, list[Tensor]]:
    """Per-item encoder pass: (H_P, all prefix flow states across paths)."""
    finals: list[Tensor] = []
    annotations: list[Tensor] = []
    for bt in blended:
        seqs = [vocab.encode_all(program.statements[sid].tokens) for sid in bt.statement_ids]
        final, prefixes = encode_blended(bt, seqs, params, config, vocab)
        finals.append(final)
        annotations.extend(prefixes)
    return pool_program(finals), annotations


def decode_name(
    h_p: Tensor,
    annotations: list[Tensor],
    params: dict,
    config: ModelConfig,
    name_vocab: NameVocab,
    max_len: int = 8,
) -> list[str]:
    """Greedy decode: begin token in, sub-words out until ``<end>``/``max_len``."""
    if max_len < 1:
        raise ValueError("max_len must be ≥ 1")
    out: list[str] = []
    with nd.no_grad():
        h_d = nd.tanh(h_p @ params["bridge"])
        y = np.array([name_vocab.begin_id], dtype=np.int64)
        for _ in range(max_len):
            c, _ = attention_context(h_d, annotations, params)
            x = nd.concat([nd.take_rows(params["dec_embed"], y), c], axis=1)
            h_d = _cell_step(params, "fd", config.cell, x, h_d)
            nxt = int((h_d @ params["out_proj"]).data.argmax(axis=1)[0])
            if nxt == name_vocab.end_id:
                break
            out.append(name_vocab.decode(nxt))
            y = np.array([nxt], dtype=np.int64)
    return out


# --- batched decoding --------------------------------------------------------


def _annotation_index(batch: PackedBatch) -> tuple[np.ndarray, np.ndarray]:
    """Flat (step-major) prefix-row indices per program, plus validity mask."""
    p_count = batch.step_mask.shape[0]
    lengths = batch.step_mask.sum(axis=1).astype(np.int64)
    per_program = [
        int(lengths[start : start + count].sum()) for start, count in batch.path_slices
    ]
    a_max = max(per_program)
    idx = np.zeros((len(per_program), a_max), dtype=np.int64)
    mask = np.zeros((len(per_program), a_max), dtype=np.float64)
    for b, (start, count) in enumerate(batch.path_slices):
        cursor = 0
        for p in range(start, start + count):
            for t in range(lengths[p]):
                idx[b, cursor] = t * p_count + p
                cursor += 1
        mask[b, :cursor] = 1.0
    return idx, mask


class _DecoderRun:
    """One encoder pass plus precomputed attention ingredients for a batch."""

    def __init__(self, params: dict, config: ModelConfig, batch: PackedBatch):
        self.params, self.config = params, config
        h_p, prefixes = encode_batch(params, config, batch, collect_prefixes=True)
        p_count = batch.step_mask.shape[0]
        flat = nd.reshape(nd.stack(prefixes), (len(prefixes) * p_count, config.d_hidden))
        idx, mask = _annotation_index(batch)
        self.b, self.a_max = idx.shape
        self.ann = nd.take_rows(flat, idx.reshape(-1))  # [B*A, d]
        self.pre = self.ann @ params["a2_u"]
        self.rep = np.repeat(np.arange(self.b), self.a_max)
        self.bias = Tensor((mask - 1.0) * -MASK_BIAS)  # 0 where valid, -1e9 at padding
        self.h_d = nd.tanh(h_p @ params["bridge"])

    def step(self, y_ids: np.ndarray) -> Tensor:
        """Advance one emission step on inputs ``y_ids``; returns [B, V] logits."""
        p, c = self.params, self.config
        ctx = nd.take_rows(self.h_d @ p["a2_c"], self.rep)
        scores = nd.tanh(self.pre + ctx) @ p["a2_v"]
        alpha = nd.softmax(nd.reshape(scores, (self.b, self.a_max)) + self.bias, axis=1)
        weighted = self.ann * nd.reshape(alpha, (self.b * self.a_max, 1))
        context = nd.tsum(nd.reshape(weighted, (self.b, self.a_max, c.d_hidden)), axis=1)
        x = nd.concat([nd.take_rows(p["dec_embed"], y_ids), context], axis=1)
        self.h_d = _cell_step(p, "fd", c.cell, x, self.h_d)
        return self.h_d @ p["out_proj"]


def encode_names(
    names: list[list[str]], name_vocab: NameVocab
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Teacher-forcing arrays: (inputs [B, T], targets [B, T], mask [B, T]).

    Row b is ``<begin> w1..wk`` in, ``w1..wk <end>`` out; steps past k are
    padding (mask 0) and excluded from the loss.
    """
    t_max = max(len(n) for n in names) + 1
    inputs = np.full((len(names), t_max), name_vocab.end_id, dtype=np.int64)
    targets = np.full((len(names), t_max), name_vocab.end_id, dtype=np.int64)
    mask = np.zeros((len(names), t_max), dtype=np.float64)
    for b, subwords in enumerate(names):
        ids = [name_vocab.encode(w) for w in subwords]
        inputs[b, 0] = name_vocab.begin_id
        inputs[b, 1 : 1 + len(ids)] = ids
        targets[b, : len(ids)] = ids
        targets[b, len(ids)] = name_vocab.end_id
        mask[b, : len(ids) + 1] = 1.0
    return inputs, targets, mask


def name_loss(
    params: dict,
    config: ModelConfig,
    batch: PackedBatch,
    inputs: np.ndarray,
    targets: np.ndarray,
    mask: np.ndarray,
) -> Tensor:
    """Mean teacher-forced cross-entropy over the valid emission steps."""
    run = _DecoderRun(params, config, batch)
    step_logits = [run.step(inputs[:, t]) for t in range(inputs.shape[1])]
    all_logits = nd.concat(step_logits, axis=0)  # row t*B + b
    valid = np.nonzero(mask.T.reshape(-1) > 0)[0]
    gathered = nd.take_rows(all_logits, valid)
    return nd.cross_entropy_logits(gathered, targets.T.reshape(-1)[valid])


def predict_names(
    params: dict,
    config: ModelConfig,
    programs: list[PackedProgram],
    name_vocab: NameVocab,
    max_len: int = 8,
    chunk_size: int = 64,
) -> list[list[str]]:
    """Greedy-decode a sub-word name for every program, in caller order."""
    results: list[list[str]] = []
    with nd.no_grad():
        for lo in range(0, len(programs), chunk_size):
            chunk = programs[lo : lo + chunk_size]
            run = _DecoderRun(params, config, make_batch(chunk, config.n_eps))
            y = np.full(len(chunk), name_vocab.begin_id, dtype=np.int64)
            done = np.zeros(len(chunk), dtype=bool)
            outs: list[list[str]] = [[] for _ in chunk]
            for _ in range(max_len):
                nxt = run.step(y).data.argmax(axis=1)
                for b in range(len(chunk)):
                    if done[b]:
                        continue
                    if nxt[b] == name_vocab.end_id:
                        done[b] = True
                    else:
                        outs[b].append(name_vocab.decode(int(nxt[b])))
                if done.all():
                    break
                y = nxt.astype(np.int64)
            results.extend(outs)
    return results


# --- training ----------------------------------------------------------------


@dataclass(frozen=True)
class NamerMetrics:
    epoch: int
    train_loss: float
    valid_precision: float
    valid_recall: float
    valid_f1: float


def namer_metrics_csv(history: list[NamerMetrics]) -> str:
    lines = ["epoch,loss,precision,recall,f1"]
    for m in history:
        lines.append(
            f"{m.epoch},{m.train_loss:.6f},{m.valid_precision:.6f},"
            f"{m.valid_recall:.6f},{m.valid_f1:.6f}"
        )
    return "\n".join(lines) + "\n"


def evaluate_namer(
    params: dict,
    config: ModelConfig,
    programs: list[PackedProgram],
    gold: list[list[str]],
    name_vocab: NameVocab,
    max_len: int = 8,
) -> tuple[float, float, float, list[list[str]]]:
    """Micro P/R/F1 of greedy predictions against gold sub-word sequences."""
    preds = predict_names(params, config, programs, name_vocab, max_len=max_len)
    p, r, f1 = corpus_prf(zip(preds, gold))
    return p, r, f1, preds


def train_namer(
    train_set: list[PackedProgram],
    train_names: list[list[str]],
    valid_set: list[PackedProgram],
    valid_names: list[list[str]],
    config: ModelConfig,
    train_config: TrainConfig,
    vocab_size: int,
    name_vocab: NameVocab,
    seed: int,
    max_len: int = 8,
) -> tuple[dict[str, Tensor], list[NamerMetrics]]:
    """Teacher-forced Adam training; keeps the best-valid-F1 parameters.

    Mirrors the classifier loop: deterministic per-epoch shuffles drawn from
    named substreams of ``seed``, gradient clipping, early stop once the
    validation F1 has not improved for ``patience`` epochs.
    """
    if len(train_set) != len(train_names) or len(valid_set) != len(valid_names):
        raise ValueError("programs and gold names must align")
    params = init_namer_params(config, vocab_size, len(name_vocab), seed)
    adam = nd.AdamState(hyper=nd.AdamHyper(lr=train_config.lr))
    history: list[NamerMetrics] = []
    best: dict[str, np.ndarray] = {}
    best_f1, stale = -1.0, 0

    for epoch in range(train_config.epochs):
        order = nd.substream(seed, "shuffle", str(epoch)).permutation(len(train_set))
        loss_sum = 0.0
        for lo in range(0, len(order), train_config.batch_size):
            picked = order[lo : lo + train_config.batch_size]
            batch = make_batch([train_set[i] for i in picked], config.n_eps)
            arrays = encode_names([train_names[i] for i in picked], name_vocab)
            loss = name_loss(params, config, batch, *arrays)
            loss_sum += loss.item() * len(picked)
            nd.zero_grads(params)
            nd.backward(loss)
            nd.clip_global_norm(params, train_config.clip_norm)
            nd.adam_step(params, adam)
        p, r, f1, _ = evaluate_namer(
            params, config, valid_set, valid_names, name_vocab, max_len=max_len
        )
        history.append(NamerMetrics(epoch, loss_sum / len(train_set), p, r, f1))
        if f1 > best_f1:
            best_f1, stale = f1, 0
            best = {k: v.data.copy() for k, v in params.items()}
        else:
            stale += 1
            if stale > train_config.patience:
                break
    for k, v in best.items():
        params[k].data[...] = v
    return params, history


def predictions_tsv(rows: list[tuple[str, str, list[str]]]) -> str:
    """TSV report: program_id, gold_name, predicted_subwords, P, R, F1."""
    lines = ["program_id\tgold_name\tpredicted_subwords\tprecision\trecall\tf1"]
    for program_id, gold_name, predicted in rows:
        p, r, f1 = subtoken_prf(predicted, gold_name)
        lines.append(
            f"{program_id}\t{gold_name}\t{' '.join(predicted)}\t{p:.4f}\t{r:.4f}\t{f1:.4f}"
        )
    return "\n".join(lines) + "\n"
