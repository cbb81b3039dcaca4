"""How little dynamic information does the classifier actually need?

Trains once on the full trace budget, then again on a store reduced two ways:
fewer concrete runs blended per path, and a greedy coverage-minimal subset of
paths.  Accuracy holds up while the execution bill drops sharply.
"""
import tempfile
from pathlib import Path

from blendtrace.datasets import (
    CorpusSpec,
    build_vocab,
    coverage_path_for,
    execution_count,
    gen_classification_corpus,
    load_sources,
    load_store,
    pack_corpus,
    read_coverage,
    reduce_store,
    trace_corpus,
)
from blendtrace.model import ModelConfig, TrainConfig, evaluate, train_classifier


def run(tag: str, store, manifest, programs, spec, seed=3) -> None:
    vocab = build_vocab(manifest, programs, store)
    n_eps = min(bt.concrete_count for blended in store.values() for bt in blended)
    config = ModelConfig(
        n_labels=len(manifest.labels), d_embed=32, d_hidden=32,
        n_eps=n_eps, max_paths=spec.u_max,
    )
    packed = pack_corpus(manifest, programs, store, vocab, config)
    params, history = train_classifier(
        list(packed["train"].programs), list(packed["valid"].programs),
        config, TrainConfig(epochs=25, batch_size=16, lr=3e-3, patience=10),
        len(vocab), seed=seed,
    )
    acc, _, _ = evaluate(params, config, list(packed["test"].programs))
    print(f"  {tag:<22} executions {execution_count(store):5d}   test acc {acc:.3f}")


def main() -> None:
    spec = CorpusSpec(task="classify", variants_per_label=48, seed=7)
    with tempfile.TemporaryDirectory() as tmp:
        root = Path(tmp)
        manifest = gen_classification_corpus(spec, root)
        store_path = root / "traces.jsonl"
        trace_corpus(manifest, root, spec, store_path)
        store = load_store(store_path)
        coverage = read_coverage(coverage_path_for(store_path))
        programs = load_sources(manifest, root)
        print(f"{len(manifest.entries)} programs; training at three trace budgets:\n")

        run("full (5 concretes)", store, manifest, programs, spec)
        run("2 concretes", reduce_store(store, 2), manifest, programs, spec)
        run(
            "min-set, 2 concretes",
            reduce_store(store, 2, min_set=True, coverage=coverage),
            manifest, programs, spec,
        )


if __name__ == "__main__":
    main()
