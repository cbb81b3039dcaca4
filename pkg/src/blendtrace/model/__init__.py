"""Blended-trace embedding model: vocabulary, packing, network, training."""
from .config import ABLATIONS, CELLS, ModelConfig, TrainConfig, config_fingerprint
from .network import (
    classify,
    encode_blended,
    encode_statement,
    encode_state,
    encode_token_batch,
    encode_batch,
    forward_batch,
    fuse_step,
    init_params,
    param_names,
    pool_program,
    predict_program,
)
from .pack import PackedBatch, PackedProgram, make_batch, pack_program
from .train import (
    EpochMetrics,
    evaluate,
    macro_f1,
    metrics_csv,
    predict_batched,
    train_classifier,
)
from .vocab import (
    BEGIN,
    BOTTOM_TOKEN,
    END,
    PAD,
    SPECIALS,
    UNK,
    VALUE_CLAMP,
    Vocab,
    state_tokens,
    value_tokens,
)

__all__ = [
    "ABLATIONS",
    "BEGIN",
    "BOTTOM_TOKEN",
    "CELLS",
    "END",
    "EpochMetrics",
    "ModelConfig",
    "PAD",
    "PackedBatch",
    "PackedProgram",
    "SPECIALS",
    "TrainConfig",
    "UNK",
    "VALUE_CLAMP",
    "Vocab",
    "classify",
    "config_fingerprint",
    "encode_blended",
    "encode_statement",
    "encode_state",
    "encode_token_batch",
    "evaluate",
    "encode_batch",
    "forward_batch",
    "fuse_step",
    "init_params",
    "macro_f1",
    "make_batch",
    "metrics_csv",
    "pack_program",
    "param_names",
    "pool_program",
    "predict_batched",
    "predict_program",
    "train_classifier",
]
