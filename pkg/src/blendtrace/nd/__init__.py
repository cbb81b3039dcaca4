"""Minimal dense-tensor math: reverse-mode gradients, Adam, checkpoints, RNG streams."""
from .gradcheck import max_gradcheck_error, numeric_gradient, relative_error
from .io import CheckpointError, load_checkpoint, save_checkpoint
from .optim import (
    AdamHyper,
    AdamState,
    adam_step,
    clip_global_norm,
    global_grad_norm,
    zero_grads,
)
from .rng import init_uniform, substream, substream_seed
from .tensor import (
    Tensor,
    add,
    backward,
    concat,
    cross_entropy_logits,
    grad_enabled,
    matmul,
    max_elementwise,
    mul,
    narrow,
    neg,
    no_grad,
    reshape,
    sigmoid,
    softmax,
    stack,
    sub,
    take_rows,
    tanh,
    tmax,
    tmean,
    tsum,
)

__all__ = [
    "Tensor",
    "add",
    "backward",
    "concat",
    "cross_entropy_logits",
    "grad_enabled",
    "matmul",
    "max_elementwise",
    "mul",
    "narrow",
    "neg",
    "no_grad",
    "reshape",
    "sigmoid",
    "softmax",
    "stack",
    "sub",
    "take_rows",
    "tanh",
    "tmax",
    "tmean",
    "tsum",
    "AdamHyper",
    "AdamState",
    "adam_step",
    "clip_global_norm",
    "global_grad_norm",
    "zero_grads",
    "CheckpointError",
    "load_checkpoint",
    "save_checkpoint",
    "substream",
    "substream_seed",
    "init_uniform",
    "max_gradcheck_error",
    "numeric_gradient",
    "relative_error",
]
