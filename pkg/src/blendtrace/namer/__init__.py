"""Method-name prediction: sub-word decoding over blended-trace states."""
from .decoder import (
    NamerMetrics,
    attention_context,
    decode_name,
    decoder_param_names,
    encode_names,
    encode_program,
    evaluate_namer,
    init_namer_params,
    name_loss,
    namer_metrics_csv,
    predict_names,
    predictions_tsv,
    train_namer,
)
from .subwords import (
    NAME_SPECIALS,
    NameVocab,
    corpus_prf,
    match_counts,
    split_subwords,
    subtoken_prf,
)

__all__ = [
    "NAME_SPECIALS",
    "NameVocab",
    "NamerMetrics",
    "attention_context",
    "corpus_prf",
    "decode_name",
    "decoder_param_names",
    "encode_names",
    "encode_program",
    "evaluate_namer",
    "init_namer_params",
    "match_counts",
    "name_loss",
    "namer_metrics_csv",
    "predict_names",
    "predictions_tsv",
    "split_subwords",
    "subtoken_prf",
    "train_namer",
]
