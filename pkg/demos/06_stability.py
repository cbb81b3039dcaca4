"""Does the classifier keep its answer when the code is rewritten?

Four semantics-preserving transforms — constant/copy propagation, dead-code
elimination, loop unrolling, invariant hoisting — rewrite programs without
changing behavior.  A model reading traces should agree with itself across
the rewrite; the stability protocol measures how often it does.
"""
import tempfile
from pathlib import Path

from blendtrace.datasets import (
    CorpusSpec,
    build_vocab,
    gen_classification_corpus,
    load_sources,
    load_store,
    pack_corpus,
    trace_corpus,
    trace_program,
)
from blendtrace.minilang import parse_program, program_str
from blendtrace.model import ModelConfig, TrainConfig, predict_program, train_classifier
from blendtrace.transforms import TRANSFORM_KINDS, apply_transform, measure_stability

SOURCE = """\
fn f(a: int[]) {
  zz: int = 3 * 4;
  s: int = 0;
  i: int = 0;
  while (i < len(a)) {
    h: int = 2 + 5;
    s = s + a[i] + h - h;
    i = i + 1;
  }
  return s;
}
"""


def main() -> None:
    program = parse_program(SOURCE)
    print("a program with folding, dead-code, and hoisting opportunities:\n")
    print(SOURCE)
    for kind in ("const_var_propagation", "dead_code_elim", "hoisting", "loop_unroll"):
        result = apply_transform(program, kind)
        print(f"--- after {kind} (applied={result.applied}):")
        print(program_str(result.program.name, result.program.params, result.program.body))

    spec = CorpusSpec(task="classify", variants_per_label=12, seed=7)
    with tempfile.TemporaryDirectory() as tmp:
        root = Path(tmp)
        manifest = gen_classification_corpus(spec, root)
        store_path = root / "traces.jsonl"
        trace_corpus(manifest, root, spec, store_path)
        store = load_store(store_path)
        programs = load_sources(manifest, root)
        vocab = build_vocab(manifest, programs, store)
        config = ModelConfig(n_labels=6, d_embed=24, d_hidden=24, n_eps=5, max_paths=6)
        packed = pack_corpus(manifest, programs, store, vocab, config)
        params, _ = train_classifier(
            list(packed["train"].programs), list(packed["valid"].programs),
            config, TrainConfig(epochs=15, batch_size=16, lr=3e-3, patience=10),
            len(vocab), seed=3,
        )

        entries = manifest.split("test")
        seeds = {e.program_id: e.input_seed for e in entries}
        subjects = [(e.program_id, programs[e.program_id]) for e in entries]

        def tracer(program_id, prog):
            result = trace_program(prog, spec, seeds[program_id])
            return [] if result is None else result[0]

        def predict(prog, blended):
            label, _ = predict_program(prog, blended, params, config, vocab)
            return label

        print("prediction stability on the held-out split (lower = more stable):")
        for kind in TRANSFORM_KINDS:
            r = measure_stability(predict, subjects, kind, tracer)
            print(f"  {kind:<22} {r.changed}/{r.applicable} applicable changed "
                  f"({r.fraction:.0%})")


if __name__ == "__main__":
    main()
