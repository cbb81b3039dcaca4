"""Command-line pipeline: generate → trace → train → evaluate, plus the
ablation, trace-reduction, transform-stability, and name-prediction studies.

Every subcommand writes a ``run.<command>.json`` with its resolved
configuration and seed, so any artifact can be regenerated byte-identically.
Checkpoints carry a fingerprint of the model config and vocabulary; loading
one against a mismatched sidecar fails loudly instead of silently mis-scoring.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

from . import nd
from .datasets import (
    CorpusSpec,
    DatasetError,
    coverage_path_for,
    execution_count,
    gen_classification_corpus,
    gen_naming_corpus,
    load_manifest,
    load_sources,
    load_spec,
    load_store,
    pack_corpus,
    read_coverage,
    reduce_store,
    build_vocab,
    trace_corpus,
    trace_program,
    write_coverage,
)
from .minilang import MinilangError
from .model import (
    ModelConfig,
    TrainConfig,
    Vocab,
    config_fingerprint,
    evaluate,
    metrics_csv,
    predict_program,
    train_classifier,
)
from .namer import (
    NameVocab,
    evaluate_namer,
    namer_metrics_csv,
    predictions_tsv,
    train_namer,
)
from .traces import write_blended_store
from .transforms import TRANSFORM_KINDS, measure_stability

ABLATION_FLAGS = {
    "full": "full",
    "static": "static_only",
    "dynamic": "dynamic_only",
    "noattn": "no_attention",
}


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _write_run_config(report_dir: Path, command: str, resolved: dict) -> None:
    _write_json(report_dir / f"run.{command}.json", {"command": command, "config": resolved})


def reduction_path_for(store_path: str | Path) -> Path:
    return Path(store_path).with_suffix(".reduction.json")


# --- artifact loading -------------------------------------------------------------


def _load_corpus(corpus_dir: str | Path):
    corpus_dir = Path(corpus_dir)
    spec = load_spec(corpus_dir)
    manifest = load_manifest(corpus_dir)
    return spec, manifest, load_sources(manifest, corpus_dir)


def meta_path_for(ckpt_path: str | Path) -> Path:
    return Path(str(ckpt_path) + ".meta.json")


def _save_model(
    ckpt_path: Path,
    params: dict,
    config: ModelConfig,
    vocab: Vocab,
    seed: int,
    task: str,
    labels: tuple[str, ...],
    name_vocab: NameVocab | None = None,
    max_len: int = 8,
) -> None:
    vocab_hash = vocab.vocab_hash()
    if name_vocab is not None:
        vocab_hash = f"{vocab_hash}:{name_vocab.vocab_hash()}"
    ckpt_path.parent.mkdir(parents=True, exist_ok=True)
    nd.save_checkpoint(ckpt_path, params, config_fingerprint(config, vocab_hash), seed)
    meta = {
        "task": task,
        "model": asdict(config),
        "vocab": vocab.to_json(),
        "labels": list(labels),
        "seed": seed,
    }
    if name_vocab is not None:
        meta["name_vocab"] = json.loads(name_vocab.to_json())
        meta["max_len"] = max_len
    _write_json(meta_path_for(ckpt_path), meta)


def _load_model(ckpt_path: str | Path):
    """(params, config, vocab, meta); verifies the stored fingerprint."""
    meta_path = meta_path_for(ckpt_path)
    if not meta_path.exists():
        raise nd.CheckpointError(f"missing checkpoint sidecar {meta_path}")
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    config = ModelConfig(**meta["model"])
    vocab = Vocab.from_json(meta["vocab"])
    vocab_hash = vocab.vocab_hash()
    if "name_vocab" in meta:
        vocab_hash = f"{vocab_hash}:{NameVocab(tuple(meta['name_vocab']['tokens'])).vocab_hash()}"
    arrays, stored_hash, _ = nd.load_checkpoint(ckpt_path)
    expected = config_fingerprint(config, vocab_hash)
    if stored_hash != expected:
        raise nd.CheckpointError(
            f"checkpoint {ckpt_path} was trained under config/vocab hash "
            f"{stored_hash}, but the sidecar resolves to {expected}"
        )
    params = {name: nd.Tensor(data, requires_grad=True) for name, data in arrays.items()}
    return params, config, vocab, meta


def _resolve_model_config(args, n_labels: int, n_eps: int, max_paths: int) -> ModelConfig:
    return ModelConfig(
        n_labels=n_labels,
        d_embed=args.embed,
        d_hidden=args.hidden,
        n_eps=n_eps,
        ablation=ABLATION_FLAGS[args.ablation],
        cell=args.cell,
        max_paths=max_paths,
    )


def _store_n_eps(store: dict) -> int:
    """Concretes per blended trace actually available (min over the store)."""
    counts = [bt.concrete_count for blended in store.values() for bt in blended]
    if not counts:
        raise DatasetError("trace store is empty")
    return min(counts)


def _check_labels(manifest_labels: tuple[str, ...], meta: dict, ckpt: str) -> None:
    if list(manifest_labels) != meta["labels"]:
        raise nd.CheckpointError(
            f"checkpoint {ckpt} was trained on labels {meta['labels']}, "
            f"corpus has {list(manifest_labels)}"
        )


# --- subcommands -------------------------------------------------------------------


def cmd_gen(args) -> int:
    spec = CorpusSpec(
        task=args.task,
        variants_per_label=args.variants,
        seed=args.seed,
        labels=tuple(args.labels or ()),
        n_eps=args.n_eps,
        u_max=args.u_max,
    )
    out_dir = Path(args.out)
    gen = gen_classification_corpus if args.task == "classify" else gen_naming_corpus
    manifest = gen(spec, out_dir)
    _write_run_config(out_dir, "gen", {"out": str(out_dir), **asdict(spec)})
    per = len(manifest.entries) // len(manifest.labels)
    print(f"gen: {len(manifest.entries)} programs ({len(manifest.labels)} labels x {per}) -> {out_dir}")
    return 0


def cmd_trace(args) -> int:
    spec, manifest, programs = _load_corpus(args.corpus)
    store_path = Path(args.traces or Path(args.corpus) / "traces.jsonl")
    report = trace_corpus(manifest, args.corpus, spec, store_path)
    _write_run_config(
        store_path.parent, "trace", {"corpus": str(args.corpus), "traces": str(store_path)}
    )
    print(f"trace: kept {len(report.kept)}/{report.total}, dropped {len(report.dropped)} -> {store_path}")
    if report.dropped:
        print(f"trace: dropped ids: {', '.join(report.dropped)}")
    return 0


def _train_classifier_impl(args) -> int:
    spec, manifest, programs = _load_corpus(args.corpus)
    store = load_store(args.traces)
    vocab = build_vocab(manifest, programs, store)
    config = _resolve_model_config(args, len(manifest.labels), _store_n_eps(store), spec.u_max)
    train_config = TrainConfig(
        epochs=args.epochs, batch_size=args.batch, lr=args.lr, patience=args.patience
    )
    packed = pack_corpus(manifest, programs, store, vocab, config)
    params, history = train_classifier(
        list(packed["train"].programs),
        list(packed["valid"].programs),
        config,
        train_config,
        len(vocab),
        args.seed,
    )
    _save_model(
        Path(args.ckpt), params, config, vocab, args.seed, "classify", manifest.labels
    )
    report_dir = Path(args.report)
    _write_text(report_dir / "metrics.csv", metrics_csv(history))
    _write_run_config(
        report_dir,
        args.command,
        {
            "corpus": str(args.corpus),
            "traces": str(args.traces),
            "ckpt": str(args.ckpt),
            "seed": args.seed,
            "model": asdict(config),
            "train": asdict(train_config),
        },
    )
    best = max(m.valid_acc for m in history)
    print(
        f"{args.command}: {len(history)} epochs, best valid acc {best:.4f}, "
        f"ablation {config.ablation} -> {args.ckpt}"
    )
    return 0


def cmd_train(args) -> int:
    return _train_classifier_impl(args)


def _eval_impl(args) -> int:
    params, config, vocab, meta = _load_model(args.ckpt)
    if meta["task"] != "classify":
        raise nd.CheckpointError(f"checkpoint {args.ckpt} is a {meta['task']} model")
    spec, manifest, programs = _load_corpus(args.corpus)
    _check_labels(manifest.labels, meta, args.ckpt)
    store = load_store(args.traces)
    packed = pack_corpus(manifest, programs, store, vocab, config)
    split = packed[args.split]
    acc, f1, _ = evaluate(params, config, list(split.programs), args.batch)
    payload = {
        "split": args.split,
        "n": len(split),
        "accuracy": acc,
        "macro_f1": f1,
        "execution_count": execution_count(store),
        "ablation": config.ablation,
    }
    reduction_path = reduction_path_for(args.traces)
    if reduction_path.exists():
        payload["reduction"] = json.loads(reduction_path.read_text(encoding="utf-8"))
    report_dir = Path(args.report)
    _write_json(report_dir / "eval.json", payload)
    _write_run_config(
        report_dir,
        "eval",
        {
            "corpus": str(args.corpus),
            "traces": str(args.traces),
            "ckpt": str(args.ckpt),
            "split": args.split,
        },
    )
    print(f"eval: {args.split} accuracy {acc:.4f}, macro-F1 {f1:.4f} ({len(split)} programs)")
    if "reduction" in payload:
        r = payload["reduction"]
        print(
            f"eval: reduced store, executions {r['executions_before']} -> "
            f"{r['executions_after']}, coverage preserved: {r['coverage_preserved']}"
        )
    return 0


def cmd_eval(args) -> int:
    return _eval_impl(args)


def cmd_ablate(args) -> int:
    """Train + evaluate one ablation; with --ablation full this reproduces
    cmd_train followed by cmd_eval exactly (same code path, same seeds)."""
    status = _train_classifier_impl(args)
    if status:
        return status
    return _eval_impl(args)


def cmd_reduce(args) -> int:
    store = load_store(args.traces)
    coverage = read_coverage(coverage_path_for(args.traces))
    reduced = reduce_store(
        store, args.keep_concretes, min_set=args.min_set, seed=args.seed, coverage=coverage
    )
    kept_coverage = {
        program_id: {bt.key: coverage[program_id][bt.key] for bt in blended}
        for program_id, blended in reduced.items()
    }
    preserved = all(
        frozenset().union(*kept_coverage[pid].values())
        == frozenset().union(*coverage[pid].values())
        for pid in reduced
    )
    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    write_blended_store(out_path, [(pid, reduced[pid]) for pid in reduced])
    write_coverage(coverage_path_for(out_path), kept_coverage)
    summary = {
        "keep_concretes": args.keep_concretes,
        "min_set": args.min_set,
        "seed": args.seed,
        "executions_before": execution_count(store),
        "executions_after": execution_count(reduced),
        "coverage_preserved": preserved,
    }
    _write_json(reduction_path_for(out_path), summary)
    _write_run_config(
        out_path.parent, "reduce", {"traces": str(args.traces), "out": str(out_path), **summary}
    )
    print(
        f"reduce: executions {summary['executions_before']} -> {summary['executions_after']}, "
        f"coverage preserved: {preserved} -> {out_path}"
    )
    return 0


def cmd_stability(args) -> int:
    params, config, vocab, meta = _load_model(args.ckpt)
    if meta["task"] != "classify":
        raise nd.CheckpointError(f"checkpoint {args.ckpt} is a {meta['task']} model")
    spec, manifest, programs = _load_corpus(args.corpus)
    _check_labels(manifest.labels, meta, args.ckpt)
    entries = manifest.split(args.split)
    input_seeds = {e.program_id: e.input_seed for e in entries}
    subjects = [(e.program_id, programs[e.program_id]) for e in entries]

    def tracer(program_id, program):
        result = trace_program(program, spec, input_seeds[program_id])
        return [] if result is None else result[0]

    def predict(program, blended) -> int:
        label, _ = predict_program(program, blended, params, config, vocab)
        return label

    lines = ["kind,total,applicable,changed,fraction"]
    for kind in TRANSFORM_KINDS:
        report = measure_stability(predict, subjects, kind, tracer, factor=args.factor)
        lines.append(
            f"{kind},{report.total},{report.applicable},{report.changed},{report.fraction:.6f}"
        )
        print(
            f"stability: {kind}: {report.changed}/{report.applicable} applicable "
            f"predictions changed ({report.fraction:.1%})"
        )
    report_dir = Path(args.report)
    _write_text(report_dir / "stability.csv", "\n".join(lines) + "\n")
    _write_run_config(
        report_dir,
        "stability",
        {
            "corpus": str(args.corpus),
            "ckpt": str(args.ckpt),
            "split": args.split,
            "factor": args.factor,
        },
    )
    return 0


def cmd_name(args) -> int:
    spec, manifest, programs = _load_corpus(args.corpus)
    if manifest.task != "name":
        raise DatasetError(f"corpus {args.corpus} is a {manifest.task!r} corpus, not 'name'")
    store = load_store(args.traces)
    vocab = build_vocab(manifest, programs, store)
    name_vocab = NameVocab.build(e.label for e in manifest.split("train"))
    config = _resolve_model_config(args, len(manifest.labels), _store_n_eps(store), spec.u_max)
    train_config = TrainConfig(
        epochs=args.epochs, batch_size=args.batch, lr=args.lr, patience=args.patience
    )
    packed = pack_corpus(manifest, programs, store, vocab, config)
    params, history = train_namer(
        list(packed["train"].programs),
        [list(n) for n in packed["train"].names],
        list(packed["valid"].programs),
        [list(n) for n in packed["valid"].names],
        config,
        train_config,
        len(vocab),
        name_vocab,
        args.seed,
        max_len=args.max_len,
    )
    _save_model(
        Path(args.ckpt), params, config, vocab, args.seed, "name", manifest.labels,
        name_vocab=name_vocab, max_len=args.max_len,
    )
    test = packed["test"]
    p, r, f1, preds = evaluate_namer(
        params, config, list(test.programs), [list(n) for n in test.names],
        name_vocab, max_len=args.max_len,
    )
    report_dir = Path(args.report)
    _write_text(report_dir / "metrics.csv", namer_metrics_csv(history))
    rows = [
        (packed_program.program_id, "_".join(gold), pred)
        for packed_program, gold, pred in zip(test.programs, test.names, preds)
    ]
    _write_text(report_dir / "predictions.tsv", predictions_tsv(rows))
    _write_json(
        report_dir / "name_eval.json",
        {
            "split": "test",
            "n": len(test),
            "precision": p,
            "recall": r,
            "f1": f1,
            "ablation": config.ablation,
        },
    )
    _write_run_config(
        report_dir,
        "name",
        {
            "corpus": str(args.corpus),
            "traces": str(args.traces),
            "ckpt": str(args.ckpt),
            "seed": args.seed,
            "max_len": args.max_len,
            "model": asdict(config),
            "train": asdict(train_config),
        },
    )
    print(
        f"name: {len(history)} epochs, test micro P {p:.4f} / R {r:.4f} / F1 {f1:.4f}, "
        f"ablation {config.ablation} -> {args.ckpt}"
    )
    return 0


# --- parser ------------------------------------------------------------------------


def _add_model_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="root seed for init and batching")
    parser.add_argument(
        "--ablation", choices=sorted(ABLATION_FLAGS), default="full",
        help="what the fusion layer sees",
    )
    parser.add_argument("--epochs", type=int, default=30)
    parser.add_argument("--batch", type=int, default=16)
    parser.add_argument("--hidden", type=int, default=64, help="hidden width d_h")
    parser.add_argument("--embed", type=int, default=64, help="embedding width d_e")
    parser.add_argument("--lr", type=float, default=1e-3)
    parser.add_argument("--patience", type=int, default=5)
    parser.add_argument("--cell", choices=("tanh", "gru"), default="tanh")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blendtrace",
        description="Learn program embeddings from blended execution traces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic corpus")
    p.add_argument("--task", choices=("classify", "name"), required=True)
    p.add_argument("--out", required=True, help="corpus directory to create")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--variants", type=int, default=200, help="variants per label")
    p.add_argument("--labels", nargs="*", help="label subset (default: task catalog)")
    p.add_argument("--n-eps", type=int, default=5, help="concrete traces per blended trace")
    p.add_argument("--u-max", type=int, default=6, help="max blended traces per program")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("trace", help="execute corpus programs and store blended traces")
    p.add_argument("--corpus", required=True)
    p.add_argument("--traces", help="store path (default: <corpus>/traces.jsonl)")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("train", help="train the trace classifier")
    p.add_argument("--corpus", required=True)
    p.add_argument("--traces", required=True)
    p.add_argument("--ckpt", required=True)
    p.add_argument("--report", default="reports")
    _add_model_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a classifier checkpoint")
    p.add_argument("--corpus", required=True)
    p.add_argument("--traces", required=True)
    p.add_argument("--ckpt", required=True)
    p.add_argument("--report", default="reports")
    p.add_argument("--split", choices=("train", "valid", "test"), default="test")
    p.add_argument("--batch", type=int, default=32)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate", help="train + evaluate one ablation configuration")
    p.add_argument("--corpus", required=True)
    p.add_argument("--traces", required=True)
    p.add_argument("--ckpt", required=True)
    p.add_argument("--report", default="reports")
    p.add_argument("--split", choices=("train", "valid", "test"), default="test")
    _add_model_flags(p)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("reduce", help="shrink a trace store (fewer concretes / min-set paths)")
    p.add_argument("--traces", required=True, help="input store")
    p.add_argument("--out", required=True, help="output store")
    p.add_argument("--keep-concretes", type=int, required=True)
    p.add_argument("--min-set", action="store_true", help="keep only a coverage-minimal path set")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("stability", help="prediction stability under semantics-preserving transforms")
    p.add_argument("--corpus", required=True)
    p.add_argument("--ckpt", required=True)
    p.add_argument("--report", default="reports")
    p.add_argument("--split", choices=("train", "valid", "test"), default="test")
    p.add_argument("--factor", type=int, default=2, help="loop unroll factor")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("name", help="train + evaluate the method-name decoder")
    p.add_argument("--corpus", required=True)
    p.add_argument("--traces", required=True)
    p.add_argument("--ckpt", required=True)
    p.add_argument("--report", default="reports")
    p.add_argument("--max-len", type=int, default=8, help="decoded sub-words per name")
    _add_model_flags(p)
    p.set_defaults(func=cmd_name)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DatasetError, MinilangError, nd.CheckpointError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
