"""Predicting a method's name, one sub-word at a time.

The same trace encoder feeds a recurrent decoder that attends over every
prefix embedding of every path and emits the name as a sub-word sequence
("sum_positive" → "sum", "positive").  Scoring is multiset precision /
recall / F1 over sub-words, so "positive_sum" would still be a perfect hit.
"""
import tempfile
from pathlib import Path

from blendtrace.datasets import (
    CorpusSpec,
    build_vocab,
    gen_naming_corpus,
    load_sources,
    load_store,
    pack_corpus,
    trace_corpus,
)
from blendtrace.model import ModelConfig, TrainConfig
from blendtrace.namer import NameVocab, evaluate_namer, subtoken_prf, train_namer


def main() -> None:
    print("the metric first:")
    for pred, gold in ([["find", "max"], "find_max"], [["max"], "find_max"],
                       [["find", "the", "max"], "find_max"]):
        p, r, f1 = subtoken_prf(pred, gold)
        print(f"  predicted {pred!r:>24} vs gold {gold!r}: "
              f"P {p:.3f} R {r:.3f} F1 {f1:.3f}")

    spec = CorpusSpec(task="name", variants_per_label=8, seed=11)
    with tempfile.TemporaryDirectory() as tmp:
        root = Path(tmp)
        manifest = gen_naming_corpus(spec, root)
        store_path = root / "traces.jsonl"
        trace_corpus(manifest, root, spec, store_path)
        store = load_store(store_path)
        programs = load_sources(manifest, root)
        vocab = build_vocab(manifest, programs, store)
        name_vocab = NameVocab.build(e.label for e in manifest.split("train"))
        print(f"\n{len(manifest.entries)} programs over {len(manifest.labels)} names; "
              f"{len(name_vocab)} sub-words: {name_vocab.tokens[3:]}")

        config = ModelConfig(n_labels=12, d_embed=32, d_hidden=32, n_eps=5, max_paths=6)
        packed = pack_corpus(manifest, programs, store, vocab, config)
        params, history = train_namer(
            list(packed["train"].programs), [list(n) for n in packed["train"].names],
            list(packed["valid"].programs), [list(n) for n in packed["valid"].names],
            config, TrainConfig(epochs=30, batch_size=8, lr=3e-3, patience=12),
            len(vocab), name_vocab, seed=5,
        )
        for m in history[::5]:
            print(f"  epoch {m.epoch:2d}: loss {m.train_loss:.4f}, valid F1 {m.valid_f1:.3f}")

        test = packed["test"]
        p, r, f1, preds = evaluate_namer(
            params, config, list(test.programs), [list(n) for n in test.names], name_vocab,
        )
        print(f"\ntest micro precision {p:.3f} / recall {r:.3f} / F1 {f1:.3f}\n")
        print("held-out predictions:")
        for packed_program, gold, pred in list(zip(test.programs, test.names, preds))[:12]:
            print(f"  {packed_program.program_id:<22} gold {'_'.join(gold):<16} "
                  f"predicted {' '.join(pred)}")


if __name__ == "__main__":
    main()
