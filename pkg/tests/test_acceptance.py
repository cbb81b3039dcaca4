"""Acceptance suite: one test per shipping criterion, printed as a checklist.

Each test prints a single ``ACCEPTANCE n: ... PASS/FAIL`` line (visible with
``pytest -s`` or on failure); the pytest -v report itself doubles as the
pass/fail checklist.  Training-based criteria run scaled-down corpora sized
to finish on a desk CPU while keeping the stated architecture contracts.
"""
import json
import time
from pathlib import Path

import numpy as np
import pytest

from blendtrace import nd
from blendtrace.cli import main as cli_main
from blendtrace.datasets import (
    CorpusSpec,
    build_vocab,
    coverage_path_for,
    execution_count,
    gen_classification_corpus,
    gen_naming_corpus,
    load_sources,
    load_store,
    pack_corpus,
    read_coverage,
    reduce_store,
    trace_corpus,
    trace_program,
)
from blendtrace.minilang import random_inputs
from blendtrace.model import (
    ModelConfig,
    TrainConfig,
    evaluate,
    fuse_step,
    init_params,
    make_batch,
    predict_program,
    train_classifier,
)
from blendtrace.model.network import encode_blended, forward_batch, pool_program
from blendtrace.namer import NameVocab, evaluate_namer, subtoken_prf, train_namer
from blendtrace.traces import select_min_coverage_set
from blendtrace.transforms import TRANSFORM_KINDS, apply_transform, check_equivalence, measure_stability

# classifier studies (criteria 7/8): stated architecture, desk-size corpus
ROBUST_VARIANTS = 64
ROBUST_SEEDS = (3, 5, 7)
ROBUST_TRAIN = TrainConfig(epochs=25, batch_size=16, lr=3e-3, patience=25)
# naming study (criterion 10)
NAMING_SEEDS = (5, 9)
NAMING_TRAIN = TrainConfig(epochs=40, batch_size=8, lr=1e-3, patience=40)


def _verdict(num: int, name: str, ok: bool, detail: str = "") -> None:
    suffix = f" ({detail})" if detail else ""
    print(f"\nACCEPTANCE {num:2d}: {name}: {'PASS' if ok else 'FAIL'}{suffix}")
    assert ok, f"criterion {num} — {name}{suffix}"


def _config(n_labels: int, d: int = 64, n_eps: int = 5, ablation: str = "full") -> ModelConfig:
    return ModelConfig(
        n_labels=n_labels, d_embed=d, d_hidden=d, n_eps=n_eps, ablation=ablation, max_paths=6
    )


def _train_eval(packed, config, vocab_size, seed, train_config=ROBUST_TRAIN) -> float:
    params, _ = train_classifier(
        list(packed["train"].programs), list(packed["valid"].programs),
        config, train_config, vocab_size, seed,
    )
    acc, _, _ = evaluate(params, config, list(packed["test"].programs))
    return acc


@pytest.fixture(scope="session")
def robustness_corpus(tmp_path_factory):
    """6-class corpus shared by the pooling, coverage, and reduction criteria."""
    root = tmp_path_factory.mktemp("acc-robust")
    spec = CorpusSpec(task="classify", variants_per_label=ROBUST_VARIANTS, seed=19)
    manifest = gen_classification_corpus(spec, root)
    store_path = root / "traces.jsonl"
    report = trace_corpus(manifest, root, spec, store_path)
    assert not report.dropped
    store = load_store(store_path)
    coverage = read_coverage(coverage_path_for(store_path))
    programs = load_sources(manifest, root)
    vocab = build_vocab(manifest, programs, store)
    return spec, manifest, programs, store, coverage, vocab


# --- 1. gradient oracle -------------------------------------------------------------


def test_criterion_01_gradient_oracle():
    started = time.monotonic()
    rng = nd.substream(0, "acceptance", "gradcheck")

    def spread(*shape):
        # well-separated values keep max-style kinks away from finite-difference steps
        base = rng.normal(size=shape)
        return base + 0.25 * np.arange(base.size).reshape(shape)

    def build_op_cases(r):
        a = nd.Tensor(rng.normal(size=(2, 3)), requires_grad=True)
        b = nd.Tensor(rng.normal(size=(2, 3)), requires_grad=True)
        m = nd.Tensor(rng.normal(size=(3, 2)), requires_grad=True)
        k = nd.Tensor(spread(2, 3), requires_grad=True)
        k2 = nd.Tensor(spread(2, 3) * 0.5, requires_grad=True)
        labels = rng.integers(0, 3, 2)
        return {
            "add": ({"a": a, "b": b}, lambda: nd.tsum(nd.add(a, b))),
            "sub": ({"a": a, "b": b}, lambda: nd.tsum(nd.sub(a, b))),
            "mul": ({"a": a, "b": b}, lambda: nd.tsum(nd.mul(a, b))),
            "neg": ({"a": a}, lambda: nd.tsum(nd.neg(a))),
            "matmul": ({"a": a, "m": m}, lambda: nd.tsum(a @ m)),
            "tanh": ({"a": a}, lambda: nd.tsum(nd.tanh(a))),
            "sigmoid": ({"a": a}, lambda: nd.tsum(nd.sigmoid(a))),
            "softmax": ({"a": a, "b": b}, lambda: nd.tsum(nd.mul(nd.softmax(a, axis=1), b))),
            "reshape": ({"a": a, "b": b}, lambda: nd.tsum(nd.mul(nd.reshape(a, (3, 2)), nd.reshape(b, (3, 2))))),
            "concat": ({"a": a, "b": b}, lambda: nd.tsum(nd.tanh(nd.concat([a, b], axis=0)))),
            "stack": ({"a": a, "b": b}, lambda: nd.tsum(nd.tanh(nd.stack([a, b])))),
            "narrow": ({"a": a}, lambda: nd.tsum(nd.narrow(a, axis=1, start=1, length=2))),
            "take_rows": ({"a": a}, lambda: nd.tsum(nd.take_rows(a, np.array([1, 0, 1])))),
            "tmax": ({"k": k}, lambda: nd.tsum(nd.tmax(k, axis=1))),
            "tmean": ({"a": a}, lambda: nd.tmean(a)),
            "tsum": ({"a": a}, lambda: nd.tsum(nd.mul(a, a))),
            "max_elementwise": ({"k": k, "k2": k2}, lambda: nd.tsum(nd.max_elementwise([k, k2]))),
            "cross_entropy_logits": ({"a": a}, lambda: nd.cross_entropy_logits(a, labels)),
        }

    worst: dict[str, float] = {}
    for round_idx in range(100):
        for name, (params, build_loss) in build_op_cases(round_idx).items():
            err = nd.max_gradcheck_error(build_loss, params, h=1e-5)
            worst[name] = max(worst.get(name, 0.0), err)
    op_worst = max(worst.values())

    # end-to-end: a two-ordered-pair blended trace through the full network
    from blendtrace.minilang import execute, parse_program
    from blendtrace.model import Vocab, pack_program, state_tokens
    from blendtrace.traces import build_blended

    program = parse_program("fn bump(x: int) { x = x + 1; return x; }")
    traces = [execute(program, {"x": v}) for v in (1, 2, 3)]
    blended = build_blended(traces, n_eps=3)
    assert len(blended.pairs) == 2
    streams = [st.tokens for st in program.statements]
    streams += [state_tokens(s) for pair in blended.pairs for s in pair.states]
    vocab = Vocab.build(streams)
    config = ModelConfig(n_labels=3, d_embed=5, d_hidden=6, n_eps=3, max_paths=2)
    params = init_params(config, len(vocab), seed=1)
    packed = pack_program(program, [blended], vocab, config, label=1)
    batch = make_batch([packed], config.n_eps)

    def end_to_end():
        logits, _ = forward_batch(params, config, batch)
        return nd.cross_entropy_logits(logits, batch.labels)

    e2e_err = nd.max_gradcheck_error(end_to_end, params, h=1e-5)
    elapsed = time.monotonic() - started

    _verdict(
        1, "gradient oracle vs central differences",
        op_worst < 1e-4 and e2e_err < 1e-3 and elapsed < 60.0,
        f"op max rel err {op_worst:.2e}, end-to-end {e2e_err:.2e}, {elapsed:.1f}s",
    )


# --- 2. attention normalization -----------------------------------------------------


def test_criterion_02_attention_normalization():
    config = _config(n_labels=3, d=8)
    params = init_params(config, vocab_size=11, seed=2)
    rng = nd.substream(0, "acceptance", "fuse")
    modes = ("full", "dynamic_only", "no_attention", "static_only")
    checked = 0
    ok = True
    for i in range(1000):
        mode = modes[i % len(modes)]
        n_states = int(rng.integers(1, 6))
        h_stmt = nd.Tensor(rng.normal(size=(1, 8)))
        h_states = [nd.Tensor(rng.normal(size=(1, 8))) for _ in range(n_states)]
        first = i % 8 < 4
        h_prev = None if first else nd.Tensor(rng.normal(size=(1, 8)))
        _, alpha = fuse_step(h_stmt, h_states, h_prev, params, mode)
        if mode == "static_only":
            ok &= np.array_equal(alpha, np.array([1.0]))
        elif mode == "no_attention":
            ok &= np.array_equal(alpha, np.full(1 + n_states, 1.0 / (1 + n_states)))
        else:
            expect_len = n_states if mode == "dynamic_only" else 1 + n_states
            ok &= alpha.shape == (expect_len,)
            ok &= abs(alpha.sum() - 1.0) <= 1e-9 and bool((alpha > 0).all())
            if first:
                ok &= np.array_equal(alpha, np.full(expect_len, 1.0 / expect_len))
        checked += 1
        if not ok:
            break
    _verdict(
        2, "attention weights normalized; exact ablation contracts",
        ok and checked == 1000, f"{checked} fused steps checked",
    )


# --- 3. pooling order invariance ----------------------------------------------------


def _pooled_embedding(program, blended, params, config, vocab) -> np.ndarray:
    """H_P exactly as inference computes it: per-path encoding, then max pool."""
    with nd.no_grad():
        embeds = []
        for bt in blended[: config.max_paths]:
            seqs = [
                vocab.encode_all(program.statements[sid].tokens)
                for sid in bt.statement_ids[: config.max_steps]
            ]
            final, _ = encode_blended(bt, seqs, params, config, vocab)
            embeds.append(final)
        return pool_program(embeds).data.copy()


def test_criterion_03_pooling_order_invariance(robustness_corpus):
    spec, manifest, programs, store, _, vocab = robustness_corpus
    config = _config(len(manifest.labels))
    params = init_params(config, len(vocab), seed=4)
    rng = nd.substream(0, "acceptance", "permute")

    subjects = [e for e in manifest.entries if len(store[e.program_id]) > 1][:100]
    assert len(subjects) == 100
    stable = 0
    for entry in subjects:
        program = programs[entry.program_id]
        blended = store[entry.program_id]
        order = rng.permutation(len(blended))
        shuffled = [blended[i] for i in order]
        h_a = _pooled_embedding(program, blended, params, config, vocab)
        h_b = _pooled_embedding(program, shuffled, params, config, vocab)
        label_a, _ = predict_program(program, blended, params, config, vocab)
        label_b, _ = predict_program(program, shuffled, params, config, vocab)
        if np.array_equal(h_a, h_b) and label_a == label_b:
            stable += 1
    _verdict(
        3, "program embedding bit-identical under path permutation",
        stable == 100, f"{stable}/100 programs",
    )


# --- 4. transform oracle ------------------------------------------------------------


@pytest.fixture(scope="session")
def transform_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("acc-transform")
    spec = CorpusSpec(task="classify", variants_per_label=34, seed=23, attempts=120)
    manifest = gen_classification_corpus(spec, root)
    programs = load_sources(manifest, root)
    return spec, manifest, programs


def test_criterion_04_transform_equivalence_oracle(transform_corpus):
    spec, manifest, programs = transform_corpus
    subjects = [programs[e.program_id] for e in manifest.entries[:200]]
    checked = equivalent = 0
    for idx, program in enumerate(subjects):
        inputs = list(random_inputs(program, 20, seed=1000 + idx))
        for kind in TRANSFORM_KINDS:
            if kind == "identity":
                continue
            result = apply_transform(program, kind)
            if not result.applied:
                continue
            checked += 1
            equivalent += bool(check_equivalence(program, result.program, inputs))

    config = _config(len(manifest.labels), d=16)
    entries = manifest.entries[:200]
    seeds = {e.program_id: e.input_seed for e in entries}
    traced = {}

    def tracer(program_id, prog):
        key = (program_id, prog.text)
        if key not in traced:
            result = trace_program(prog, spec, seeds[program_id])
            traced[key] = [] if result is None else result[0]
        return traced[key]

    # vocabulary over the subjects so random-weight predictions are well-defined
    from blendtrace.model import Vocab, state_tokens
    streams = []
    for e in entries:
        program = programs[e.program_id]
        streams.extend(st.tokens for st in program.statements)
        for bt in tracer(e.program_id, program):
            for pair in bt.pairs:
                streams.extend(state_tokens(s) for s in pair.states)
    vocab_probe = Vocab.build(streams)
    params = init_params(config, len(vocab_probe), seed=6)

    def predict(prog, blended):
        label, _ = predict_program(prog, blended, params, config, vocab_probe)
        return label

    identity_report = measure_stability(
        predict, [(e.program_id, programs[e.program_id]) for e in entries], "identity", tracer
    )
    _verdict(
        4, "semantics-preserving transforms: 100% behavioral equivalence",
        checked > 0 and equivalent == checked and identity_report.fraction == 0.0,
        f"{equivalent}/{checked} (program, transform) pairs equivalent on 20 inputs; "
        f"identity change fraction {identity_report.fraction}",
    )


# --- 5. coverage-minimal selection --------------------------------------------------


def test_criterion_05_min_coverage_selection(robustness_corpus):
    _, _, _, store, coverage, _ = robustness_corpus
    forced = {
        "A": frozenset({(1, True), (1, False)}),
        "B": frozenset({(1, False)}),
        "C": frozenset({(2, True)}),
    }
    forced_ok = select_min_coverage_set(forced) == ["A", "C"]

    multi = 0
    preserved = 0
    for program_id, paths in coverage.items():
        if len(paths) < 2:
            continue
        multi += 1
        chosen = select_min_coverage_set(paths)
        full_union = frozenset().union(*paths.values())
        kept_union = frozenset().union(*(paths[k] for k in chosen)) if chosen else frozenset()
        preserved += bool(kept_union == full_union and len(chosen) <= len(paths))
    _verdict(
        5, "greedy min-coverage path selection preserves branch coverage",
        forced_ok and multi > 0 and preserved == multi,
        f"forced example ok; {preserved}/{multi} multi-path programs preserved",
    )


# --- 6. desk-scale classification ---------------------------------------------------


def test_criterion_06_desk_scale_classification(tmp_path_factory):
    root = tmp_path_factory.mktemp("acc-desk")
    spec = CorpusSpec(task="classify", variants_per_label=200, seed=7)
    manifest = gen_classification_corpus(spec, root)
    store_path = root / "traces.jsonl"
    trace_corpus(manifest, root, spec, store_path)
    store = load_store(store_path)
    programs = load_sources(manifest, root)
    vocab = build_vocab(manifest, programs, store)
    config = _config(len(manifest.labels), d=64)
    packed = pack_corpus(manifest, programs, store, vocab, config)
    splits = {k: len(v) for k, v in packed.items()}

    started = time.monotonic()
    params, history = train_classifier(
        list(packed["train"].programs), list(packed["valid"].programs),
        config, TrainConfig(epochs=30, batch_size=16, lr=3e-3, patience=30),
        len(vocab), seed=3,
    )
    acc, f1, _ = evaluate(params, config, list(packed["test"].programs))
    elapsed = time.monotonic() - started
    _verdict(
        6, "6-class desk corpus reaches 95% test accuracy within 30 epochs",
        splits == {"train": 720, "valid": 240, "test": 240}
        and len(history) <= 30 and acc >= 0.95 and elapsed < 45 * 60,
        f"test acc {acc:.4f} (macro-F1 {f1:.4f}) after {len(history)} epochs, "
        f"{elapsed / 60:.1f} min",
    )


# --- 7/8. trace-budget robustness ---------------------------------------------------


@pytest.fixture(scope="session")
def budget_accuracies(robustness_corpus):
    """Test accuracy per (ablation, store variant, seed) under one budget."""
    spec, manifest, programs, store, coverage, vocab = robustness_corpus
    stores = {
        "full5": store,
        "rand2": reduce_store(store, 2, seed=0),
        "min2": reduce_store(store, 2, min_set=True, seed=0, coverage=coverage),
    }
    acc: dict[tuple[str, str, int], float] = {}
    for tag, st in stores.items():
        n_eps = min(bt.concrete_count for blended in st.values() for bt in blended)
        for ablation in ("full", "dynamic_only"):
            if tag == "min2" and ablation == "dynamic_only":
                continue  # criterion 8 compares full-model budgets only
            config = _config(len(manifest.labels), n_eps=n_eps, ablation=ablation)
            packed = pack_corpus(manifest, programs, st, vocab, config)
            for seed in ROBUST_SEEDS:
                acc[(ablation, tag, seed)] = _train_eval(packed, config, len(vocab), seed)
    executions = {tag: execution_count(st) for tag, st in stores.items()}
    return acc, executions


def test_criterion_07_concrete_budget_robustness(budget_accuracies):
    acc, _ = budget_accuracies
    rows = []
    wins = 0
    for seed in ROBUST_SEEDS:
        deg_full = acc[("full", "full5", seed)] - acc[("full", "rand2", seed)]
        deg_dyn = acc[("dynamic_only", "full5", seed)] - acc[("dynamic_only", "rand2", seed)]
        good = deg_full <= 0.03 and deg_dyn > deg_full
        wins += good
        rows.append(f"seed {seed}: full deg {deg_full:+.3f}, dynamic-only deg {deg_dyn:+.3f}")
    _verdict(
        7, "5->2 concrete reduction: full degrades <=3pts and less than dynamic-only",
        wins * 2 > len(ROBUST_SEEDS), "; ".join(rows) + f"; majority {wins}/{len(ROBUST_SEEDS)}",
    )


def test_criterion_08_min_set_efficiency(budget_accuracies):
    acc, executions = budget_accuracies
    rows = []
    wins = 0
    for seed in ROBUST_SEEDS:
        gap = acc[("full", "full5", seed)] - acc[("full", "min2", seed)]
        wins += gap <= 0.03
        rows.append(f"seed {seed}: gap {gap:+.3f}")
    fewer = executions["min2"] < executions["full5"]
    _verdict(
        8, "min-coverage 2-concrete training within 3pts at a fraction of executions",
        wins * 2 > len(ROBUST_SEEDS) and fewer,
        f"executions {executions['full5']} -> {executions['min2']}; " + "; ".join(rows),
    )


# --- 9. sub-token metric -------------------------------------------------------------


def test_criterion_09_subtoken_metric_examples():
    exact = subtoken_prf(["find", "max"], "find_max")
    drop = subtoken_prf(["max"], "find_max")
    extra = subtoken_prf(["find", "the", "max"], "find_max")
    ok = (
        exact == (1.0, 1.0, 1.0)
        and drop[0] == 1.0 and drop[1] == 0.5 and abs(drop[2] - 0.667) <= 1e-3
        and abs(extra[0] - 0.667) <= 1e-3 and extra[1] == 1.0 and abs(extra[2] - 0.8) <= 1e-3
    )
    _verdict(
        9, "sub-token precision/recall/F1 reference values",
        ok, f"{exact}, {tuple(round(v, 4) for v in drop)}, {tuple(round(v, 4) for v in extra)}",
    )


# --- 10. name prediction -------------------------------------------------------------


def test_criterion_10_name_prediction(tmp_path_factory):
    root = tmp_path_factory.mktemp("acc-name")
    spec = CorpusSpec(task="name", variants_per_label=50, seed=11)
    manifest = gen_naming_corpus(spec, root)
    store_path = root / "traces.jsonl"
    trace_corpus(manifest, root, spec, store_path)
    store = load_store(store_path)
    programs = load_sources(manifest, root)
    vocab = build_vocab(manifest, programs, store)
    name_vocab = NameVocab.build(e.label for e in manifest.split("train"))

    rows = []
    ok = True
    for seed in NAMING_SEEDS:
        scores = {}
        for ablation in ("full", "static_only"):
            config = _config(len(manifest.labels), d=64, ablation=ablation)
            packed = pack_corpus(manifest, programs, store, vocab, config)
            params, history = train_namer(
                list(packed["train"].programs), [list(n) for n in packed["train"].names],
                list(packed["valid"].programs), [list(n) for n in packed["valid"].names],
                config, NAMING_TRAIN, len(vocab), name_vocab, seed,
            )
            test = packed["test"]
            _, _, f1, _ = evaluate_namer(
                params, config, list(test.programs), [list(n) for n in test.names], name_vocab
            )
            scores[ablation] = f1
            assert len(history) <= 40
        ok &= scores["full"] >= 0.85 and scores["static_only"] < scores["full"]
        rows.append(
            f"seed {seed}: full F1 {scores['full']:.3f}, static-only {scores['static_only']:.3f}"
        )
    _verdict(
        10, "name decoder reaches micro-F1 >= 0.85; static-only strictly lower",
        ok, "; ".join(rows),
    )


# --- 11. determinism ------------------------------------------------------------------


def test_criterion_11_byte_identical_reruns(tmp_path_factory, monkeypatch):
    def run(base: Path) -> dict[str, bytes]:
        # Relative paths throughout so both runs resolve the same run configs.
        monkeypatch.chdir(base)
        args = ["--corpus", "corpus", "--traces", "corpus/traces.jsonl"]
        assert cli_main(["gen", "--task", "classify", "--out", "corpus",
                         "--seed", "13", "--variants", "8"]) == 0
        assert cli_main(["trace", *args]) == 0
        assert cli_main(["train", *args, "--ckpt", "model.ckpt",
                         "--report", "report", "--seed", "3", "--epochs", "4",
                         "--hidden", "16", "--embed", "16"]) == 0
        assert cli_main(["eval", *args, "--ckpt", "model.ckpt",
                         "--report", "report"]) == 0
        assert cli_main(["reduce", "--traces", "corpus/traces.jsonl",
                         "--out", "reduced.jsonl", "--keep-concretes", "2",
                         "--min-set"]) == 0
        out = {}
        for path in sorted(base.rglob("*")):
            if path.is_file():
                out[str(path.relative_to(base))] = path.read_bytes()
        return out

    first = run(tmp_path_factory.mktemp("acc-det-a"))
    second = run(tmp_path_factory.mktemp("acc-det-b"))
    same_names = sorted(first) == sorted(second)
    diffs = [name for name in first if same_names and first[name] != second[name]]
    _verdict(
        11, "reruns byte-identical: manifest, sources, store, checkpoint, reports",
        same_names and not diffs,
        f"{len(first)} artifacts compared" + (f"; diffs: {diffs}" if diffs else ""),
    )
