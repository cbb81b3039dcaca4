"""The blended-trace embedding network.

Three recurrent encoders share one token-embedding table:

- f1 reads a statement's tokens → static encoding of that statement,
- f2 reads a program state's value tokens → dynamic encoding (shared across
  all concrete executions),
- f3 reads the fused step vectors along one path → path embedding.

At each ordered pair the fusion layer scores the statement encoding and the
``n_eps`` state encodings against the previous f3 state (a1 scorer: item and
context projections, tanh, scalar head), softmaxes, and mixes.  The first
ordered pair always receives exactly uniform weights.  A program embedding is
the element-wise max over its path embeddings; classification is a softmax
over ``Z``-projected program embeddings.

Two forward surfaces exist: a batched one used for training (paths padded and
masked, sequences deduplicated) and a per-item one (``encode_statement`` /
``fuse_step`` / ``encode_blended`` / ``pool_program``) whose results are
bitwise reproducible per path, which the order-invariance guarantees build on.
"""
from __future__ import annotations

import numpy as np

from .. import nd
from ..nd import Tensor
from ..traces import BlendedTrace
from .config import ModelConfig
from .pack import PackedBatch
from .vocab import Vocab, state_tokens

def _rnn_param_names(prefix: str, cell: str) -> list[str]:
    if cell == "tanh":
        return [f"{prefix}_w", f"{prefix}_v"]
    return [f"{prefix}_{gate}{side}" for gate in ("z", "r", "n") for side in ("w", "v")]


def param_names(config: ModelConfig, head: bool = True) -> list[str]:
    """Parameter tensors the configuration requires, in creation order.

    ``head=False`` omits the classifier matrix ``Z`` — the encoder alone, as
    used when a decoder is stacked on top instead of a label head.
    """
    names = ["embed"]
    if config.ablation != "dynamic_only":
        names += _rnn_param_names("f1", config.cell)
    if config.ablation != "static_only":
        names += _rnn_param_names("f2", config.cell)
    names += _rnn_param_names("f3", config.cell)
    if config.ablation in ("full", "dynamic_only"):
        names += ["a1_u", "a1_c", "a1_v"]
    if head:
        names.append("Z")
    return names


def _param_shape(name: str, config: ModelConfig, vocab_size: int) -> tuple[int, int]:
    d_e, d_h = config.d_embed, config.d_hidden
    if name == "embed":
        return (vocab_size, d_e)
    if name == "Z":
        return (d_h, config.n_labels)
    if name in ("a1_u", "a1_c"):
        return (d_h, d_h)
    if name == "a1_v":
        return (d_h, 1)
    prefix, kind = name.split("_", 1)
    d_in = d_h if prefix == "f3" else d_e
    if kind.endswith("w"):
        return (d_in, d_h)
    return (d_h, d_h)


def init_params(
    config: ModelConfig, vocab_size: int, seed: int, head: bool = True
) -> dict[str, Tensor]:
    """Uniform ±0.08 init; every tensor drawn from its own named substream."""
    params: dict[str, Tensor] = {}
    for name in param_names(config, head=head):
        rng = nd.substream(seed, "init", name)
        shape = _param_shape(name, config, vocab_size)
        params[name] = Tensor(nd.init_uniform(rng, shape), requires_grad=True)
    return params


def _cell_step(params: dict, prefix: str, cell: str, x: Tensor, h: Tensor) -> Tensor:
    """One recurrence step; no bias terms, so zero rows stay exactly zero."""
    if cell == "tanh":
        return nd.tanh(x @ params[f"{prefix}_w"] + h @ params[f"{prefix}_v"])
    z = nd.sigmoid(x @ params[f"{prefix}_zw"] + h @ params[f"{prefix}_zv"])
    r = nd.sigmoid(x @ params[f"{prefix}_rw"] + h @ params[f"{prefix}_rv"])
    n = nd.tanh(x @ params[f"{prefix}_nw"] + (r * h) @ params[f"{prefix}_nv"])
    return (1.0 - z) * n + z * h


def encode_token_batch(
    params: dict, prefix: str, seqs: list[np.ndarray], config: ModelConfig
) -> Tensor:
    """Run one token RNN over right-padded sequences; returns [N, d_h] finals."""
    if not seqs:
        raise ValueError("no sequences to encode")
    n = len(seqs)
    t_max = max(len(s) for s in seqs)
    if t_max == 0:
        raise ValueError("empty token sequence")
    ids = np.zeros((n, t_max), dtype=np.int64)
    mask = np.zeros((n, t_max), dtype=np.float64)
    for i, s in enumerate(seqs):
        ids[i, : len(s)] = s
        mask[i, : len(s)] = 1.0
    h = Tensor(np.zeros((n, config.d_hidden)))
    for t in range(t_max):
        x = nd.take_rows(params["embed"], ids[:, t])
        h_new = _cell_step(params, prefix, config.cell, x, h)
        m = Tensor(mask[:, t : t + 1])
        h = m * h_new + (1.0 - m) * h
    return h


def forward_batch(params: dict, config: ModelConfig, batch: PackedBatch) -> tuple[Tensor, Tensor]:
    """Batched forward pass. Returns (logits [B, n_labels], H_P [B, d_h])."""
    h_p, _ = encode_batch(params, config, batch)
    return h_p @ params["Z"], h_p


def encode_batch(
    params: dict, config: ModelConfig, batch: PackedBatch, collect_prefixes: bool = False
) -> tuple[Tensor, list[Tensor]]:
    """Batched encoder: program embeddings plus (optionally) per-step prefixes.

    Returns ``(H_P [B, d_h], prefixes)``.  With ``collect_prefixes=True`` the
    second element holds one ``[P, d_h]`` tensor per padded step ``t``; entry
    ``(p, t)`` is path ``p``'s flow state after its ``t``-th ordered pair (or a
    carried copy of its final state where ``t`` is past the path's length —
    consumers mask those out via ``batch.step_mask``).
    """
    ablation = config.ablation
    p_count, l_max = batch.path_stmt_idx.shape
    d_h = config.d_hidden

    h_stmt = (
        encode_token_batch(params, "f1", batch.stmt_seqs, config)
        if ablation != "dynamic_only"
        else None
    )
    h_state = (
        encode_token_batch(params, "f2", batch.state_seqs, config)
        if ablation != "static_only"
        else None
    )

    if ablation == "static_only":
        item_pool, item_idx = None, None
    elif ablation == "dynamic_only":
        item_pool = h_state
        item_idx = batch.path_state_idx  # [P, L, n_eps]
    else:
        item_pool = nd.concat([h_stmt, h_state], axis=0)
        offset = len(batch.stmt_seqs)
        item_idx = np.concatenate(
            [batch.path_stmt_idx[:, :, None], batch.path_state_idx + offset], axis=2
        )  # [P, L, 1 + n_eps]

    k = item_idx.shape[2] if item_idx is not None else 0
    rep = np.repeat(np.arange(p_count), k) if k else None
    attend = ablation in ("full", "dynamic_only")

    h = Tensor(np.zeros((p_count, d_h)))
    prefixes: list[Tensor] = []
    for t in range(l_max):
        if ablation == "static_only":
            x = nd.take_rows(h_stmt, batch.path_stmt_idx[:, t])
        else:
            items = nd.take_rows(item_pool, item_idx[:, t, :].reshape(-1))  # [P*K, d]
            if not attend or t == 0:
                # exactly uniform: the first ordered pair has no flow context
                x = nd.tmean(nd.reshape(items, (p_count, k, d_h)), axis=1)
            else:
                pre = items @ params["a1_u"]
                ctx = nd.take_rows(h @ params["a1_c"], rep)
                scores = nd.tanh(pre + ctx) @ params["a1_v"]  # [P*K, 1]
                alpha = nd.softmax(nd.reshape(scores, (p_count, k)), axis=1)
                weighted = items * nd.reshape(alpha, (p_count * k, 1))
                x = nd.tsum(nd.reshape(weighted, (p_count, k, d_h)), axis=1)
        h_new = _cell_step(params, "f3", config.cell, x, h)
        m = Tensor(batch.step_mask[:, t : t + 1])
        h = m * h_new + (1.0 - m) * h
        if collect_prefixes:
            prefixes.append(h)

    pooled = [
        nd.tmax(nd.narrow(h, start, count), axis=0, keepdims=True)
        for start, count in batch.path_slices
    ]
    h_p = nd.concat(pooled, axis=0) if len(pooled) > 1 else pooled[0]
    return h_p, prefixes


# --- per-item reference API -----------------------------------------------------


def _encode_seq(params: dict, prefix: str, token_ids: np.ndarray, config: ModelConfig) -> Tensor:
    if len(token_ids) == 0:
        raise ValueError("empty token sequence")
    h = Tensor(np.zeros((1, config.d_hidden)))
    for tok in token_ids:
        x = nd.take_rows(params["embed"], np.array([tok], dtype=np.int64))
        h = _cell_step(params, prefix, config.cell, x, h)
    return h


def encode_statement(token_ids: np.ndarray, params: dict, config: ModelConfig) -> Tensor:
    """f1 over one statement's token ids → [1, d_h] static encoding."""
    return _encode_seq(params, "f1", np.asarray(token_ids, dtype=np.int64), config)


def encode_state(state, params: dict, config: ModelConfig, vocab: Vocab) -> Tensor:
    """f2 over one program state's value tokens → [1, d_h] dynamic encoding."""
    ids = vocab.encode_all(state_tokens(state))
    return _encode_seq(params, "f2", ids, config)


def fuse_step(
    h_stmt: Tensor | None,
    h_states: list[Tensor],
    h_prev: Tensor | None,
    params: dict,
    ablation: str,
) -> tuple[Tensor, np.ndarray]:
    """Mix one ordered pair's encodings into a single step vector.

    Returns (output [1, d_h], attention weights over the items).  Weight
    layout: statement first (when present), then states in execution order.
    ``h_prev=None`` marks the first ordered pair: weights are exactly uniform.
    Post-conditions per mode: full → softmax over 1+n_eps a1 scores;
    static_only → the statement vector itself (weight vector [1.0]);
    dynamic_only → softmax over state vectors only; no_attention → exactly
    uniform 1/(1+n_eps).
    """
    if ablation == "static_only":
        if h_stmt is None:
            raise ValueError("static_only requires a statement encoding")
        return h_stmt, np.array([1.0])
    if ablation == "dynamic_only":
        items = list(h_states)
    else:
        if h_stmt is None:
            raise ValueError(f"{ablation} requires a statement encoding")
        items = [h_stmt] + list(h_states)
    if not items:
        raise ValueError("nothing to fuse")
    mat = nd.concat(items, axis=0)  # [K, d_h]
    k = len(items)
    if ablation == "no_attention" or h_prev is None:
        alpha = Tensor(np.full((1, k), 1.0 / k))
    else:
        pre = mat @ params["a1_u"]
        ctx = h_prev @ params["a1_c"]
        scores = nd.tanh(pre + ctx) @ params["a1_v"]  # [K, 1]
        alpha = nd.softmax(nd.reshape(scores, (1, k)), axis=1)
    return alpha @ mat, alpha.data.ravel().copy()


def encode_blended(
    bt: BlendedTrace,
    stmt_token_seqs: list[np.ndarray],
    params: dict,
    config: ModelConfig,
    vocab: Vocab,
) -> tuple[Tensor, list[Tensor]]:
    """f3 over the fused steps of one blended trace.

    ``stmt_token_seqs`` carries the token ids of each ordered pair's statement
    (the trace itself stores only statement ids).  Returns the final flow
    state and the list of prefix states H_1..H_L (the last equals the final).
    """
    pairs = bt.pairs[: config.max_steps]
    if not pairs:
        raise ValueError("empty blended trace")
    stmt_cache: dict[tuple, Tensor] = {}
    state_cache: dict[tuple, Tensor] = {}
    h = Tensor(np.zeros((1, config.d_hidden)))
    prefixes: list[Tensor] = []
    for j, pair in enumerate(pairs):
        h_stmt = None
        if config.ablation != "dynamic_only":
            key = tuple(stmt_token_seqs[j].tolist())
            h_stmt = stmt_cache.get(key)
            if h_stmt is None:
                h_stmt = encode_statement(stmt_token_seqs[j], params, config)
                stmt_cache[key] = h_stmt
        h_states: list[Tensor] = []
        if config.ablation != "static_only":
            for state in pair.states[: config.n_eps]:
                key = tuple(vocab.encode_all(state_tokens(state)).tolist())
                enc = state_cache.get(key)
                if enc is None:
                    enc = _encode_seq(params, "f2", np.array(key, dtype=np.int64), config)
                    state_cache[key] = enc
                h_states.append(enc)
        x, _ = fuse_step(h_stmt, h_states, None if j == 0 else h, params, config.ablation)
        h = _cell_step(params, "f3", config.cell, x, h)
        prefixes.append(h)
    return h, prefixes


def pool_program(path_embeddings: list[Tensor]) -> Tensor:
    """Element-wise max over path embeddings → program embedding [1, d_h]."""
    if not path_embeddings:
        raise ValueError("no path embeddings to pool")
    if len(path_embeddings) == 1:
        return path_embeddings[0]
    return nd.max_elementwise(path_embeddings)


def classify(h_p: Tensor, params: dict) -> Tensor:
    """Probability distribution over labels: softmax(H_P · Z)."""
    return nd.softmax(h_p @ params["Z"], axis=1)


def predict_program(
    program,
    blended: list[BlendedTrace],
    params: dict,
    config: ModelConfig,
    vocab: Vocab,
) -> tuple[int, np.ndarray]:
    """Per-item inference: (argmax label, probabilities).

    Path embeddings are computed independently per trace, so the pooled
    program embedding is bit-identical under any reordering of ``blended``.
    """
    if not blended:
        raise ValueError("no blended traces")
    with nd.no_grad():
        embeds = []
        for bt in blended[: config.max_paths]:
            seqs = [
                vocab.encode_all(program.statements[sid].tokens)
                for sid in bt.statement_ids[: config.max_steps]
            ]
            final, _ = encode_blended(bt, seqs, params, config, vocab)
            embeds.append(final)
        probs = classify(pool_program(embeds), params)
    flat = probs.data.ravel()
    return int(np.argmax(flat)), flat.copy()
