"""Corpus specification, deterministic generation, and the dataset manifest.

Generation is a pure function of the ``CorpusSpec``: variant knob combos are
shuffled per label from a named substream of the root seed, rendered, checked
against the template's reference behavior on a probe suite, and split 60/20/20
(floor rounding, remainder to train).  The manifest records every program's
id, relative source path, label, split, and per-program input seed, so the
whole pipeline downstream of generation can be reproduced from the manifest
alone.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from hashlib import sha256
from pathlib import Path

from .. import nd
from ..minilang import StepLimit, execute, observable_state, parse_program
from .templates import Template, classification_templates, naming_templates

SPLITS = ("train", "valid", "test")

# probe arrays for behavior and class-separation checks; the first is the
# canonical sorting probe ([8,5,1,4,3] must come back [1,3,4,5,8] ascending)
FIXED_PROBES = (
    [8, 5, 1, 4, 3],
    [2, 1, 3],
    [1],
    [3, 3],
    [0, -2, 4, -1],
    [5, 4, 6],
    [-1, -1, 0],
    [0],
    [2, 2, 2, 1],
    [-3],
)


class DatasetError(Exception):
    """Corpus generation or loading failed."""


@dataclass(frozen=True)
class CorpusSpec:
    """Everything that determines a corpus and its traces."""

    task: str  # "classify" | "name"
    variants_per_label: int
    seed: int
    labels: tuple[str, ...] = ()  # empty → task default catalog
    n_eps: int = 5
    u_max: int = 6
    attempts: int = 300
    int_low: int = -4
    int_high: int = 4
    array_min_len: int = 2
    array_max_len: int = 4
    max_steps: int = 2000

    def __post_init__(self) -> None:
        if self.task not in ("classify", "name"):
            raise ValueError(f"unknown task {self.task!r}")
        if self.variants_per_label < 1:
            raise ValueError("variants_per_label must be ≥ 1")
        if self.n_eps < 1 or self.u_max < 1:
            raise ValueError("trace budget must be positive")
        if self.attempts < self.n_eps:
            raise ValueError("attempts must cover at least n_eps executions")
        if self.array_min_len < 1 or self.array_max_len < self.array_min_len:
            raise ValueError("bad array length range")
        if self.int_high < self.int_low:
            raise ValueError("bad value range")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(t.label for t in self.templates()))
        if self.task == "classify" and len(self.labels) < 2:
            raise ValueError("classification needs at least two labels")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("duplicate labels")

    def templates(self) -> tuple[Template, ...]:
        catalog = classification_templates() if self.task == "classify" else naming_templates()
        if not self.labels:
            return catalog
        by_label = {t.label: t for t in catalog}
        missing = [x for x in self.labels if x not in by_label]
        if missing:
            raise ValueError(f"no template for labels {missing}")
        return tuple(by_label[x] for x in self.labels)


def spec_hash(spec: CorpusSpec) -> str:
    payload = json.dumps(asdict(spec), sort_keys=True)
    return sha256(payload.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class ManifestEntry:
    program_id: str
    path: str  # relative to the corpus directory
    label: str
    split: str
    input_seed: int


@dataclass(frozen=True)
class DatasetManifest:
    task: str
    seed: int
    config_hash: str
    entries: tuple[ManifestEntry, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        ids = [e.program_id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate program ids in manifest")
        bad = [e.split for e in self.entries if e.split not in SPLITS]
        if bad:
            raise ValueError(f"unknown splits {sorted(set(bad))}")

    def split(self, name: str) -> tuple[ManifestEntry, ...]:
        if name not in SPLITS:
            raise ValueError(f"unknown split {name!r}")
        return tuple(e for e in self.entries if e.split == name)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(sorted({e.label for e in self.entries}))

    def to_json(self) -> str:
        payload = {
            "task": self.task,
            "seed": self.seed,
            "config_hash": self.config_hash,
            "entries": [asdict(e) for e in self.entries],
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "DatasetManifest":
        raw = json.loads(text)
        entries = tuple(ManifestEntry(**e) for e in raw["entries"])
        return cls(raw["task"], raw["seed"], raw["config_hash"], entries)


def probe_arrays(spec: CorpusSpec, extra: int = 6) -> list[list[int]]:
    """Fixed probes plus a few spec-seeded random arrays."""
    rng = nd.substream(spec.seed, "probes")
    probes = [list(p) for p in FIXED_PROBES]
    for _ in range(extra):
        length = int(rng.integers(spec.array_min_len, spec.array_max_len + 1))
        probes.append([int(v) for v in rng.integers(spec.int_low, spec.int_high + 1, length)])
    return probes


def behavior_fingerprint(source: str, probes: list[list[int]], max_steps: int) -> list[tuple]:
    """Observable state on every probe; raises on any fault or parse error."""
    program = parse_program(source)
    if len(program.params) != 1 or program.params[0][1] != "int[]":
        raise DatasetError(f"{program.name}: corpus programs take exactly one int[]")
    out = []
    for arr in probes:
        trace = execute(program, {program.params[0][0]: list(arr)}, StepLimit(max_steps))
        out.append(observable_state(program, trace))
    return out


def check_separation(templates: tuple[Template, ...], probes: list[list[int]]) -> None:
    """Every label pair must disagree on at least one probe's observable state."""
    refs = {t.label: [t.reference(list(p)) for p in probes] for t in templates}
    labels = [t.label for t in templates]
    for i, x in enumerate(labels):
        for y in labels[i + 1 :]:
            if refs[x] == refs[y]:
                raise DatasetError(f"labels {x!r} and {y!r} agree on every probe")


def _split_sizes(n: int) -> tuple[int, int, int]:
    valid = n // 5
    test = n // 5
    return n - valid - test, valid, test


def _generate(spec: CorpusSpec, out_dir: str | Path) -> DatasetManifest:
    out = Path(out_dir)
    (out / "sources").mkdir(parents=True, exist_ok=True)
    templates = spec.templates()
    probes = probe_arrays(spec)
    check_separation(templates, probes)

    entries: list[ManifestEntry] = []
    seen_text: set[str] = set()
    for template in templates:
        combos = template.combos()
        order = nd.substream(spec.seed, "variants", template.label).permutation(len(combos))
        expected = [template.reference(list(p)) for p in probes]
        picked: list[str] = []
        for pos in order:
            text = template.render(combos[pos])
            if text in seen_text:
                continue
            if behavior_fingerprint(text, probes, spec.max_steps) != expected:
                raise DatasetError(f"{template.label}: variant disagrees with reference")
            seen_text.add(text)
            picked.append(text)
            if len(picked) == spec.variants_per_label:
                break
        if len(picked) < spec.variants_per_label:
            raise DatasetError(
                f"{template.label}: only {len(picked)} distinct variants available"
            )

        n_train, n_valid, _ = _split_sizes(len(picked))
        split_order = nd.substream(spec.seed, "split", template.label).permutation(len(picked))
        split_of = {}
        for rank, idx in enumerate(split_order):
            if rank < n_train:
                split_of[idx] = "train"
            elif rank < n_train + n_valid:
                split_of[idx] = "valid"
            else:
                split_of[idx] = "test"

        for idx, text in enumerate(picked):
            program_id = f"{template.label}-{idx:03d}"
            rel = f"sources/{program_id}.ml"
            (out / rel).write_text(text, encoding="utf-8")
            entries.append(
                ManifestEntry(
                    program_id=program_id,
                    path=rel,
                    label=template.label,
                    split=split_of[idx],
                    input_seed=nd.substream_seed(spec.seed, "inputs", program_id),
                )
            )

    entries.sort(key=lambda e: e.program_id)
    manifest = DatasetManifest(spec.task, spec.seed, spec_hash(spec), tuple(entries))
    (out / "manifest.json").write_text(manifest.to_json(), encoding="utf-8")
    (out / "spec.json").write_text(
        json.dumps(asdict(spec), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return manifest


def gen_classification_corpus(spec: CorpusSpec, out_dir: str | Path) -> DatasetManifest:
    """Semantic-class corpus: behavior-checked variants of each class."""
    if spec.task != "classify":
        raise ValueError("spec.task must be 'classify'")
    return _generate(spec, out_dir)


def gen_naming_corpus(spec: CorpusSpec, out_dir: str | Path) -> DatasetManifest:
    """Method-name corpus: the label is the gold (multi-sub-word) name."""
    if spec.task != "name":
        raise ValueError("spec.task must be 'name'")
    return _generate(spec, out_dir)


def load_manifest(corpus_dir: str | Path) -> DatasetManifest:
    path = Path(corpus_dir) / "manifest.json"
    if not path.exists():
        raise DatasetError(f"no manifest at {path}")
    return DatasetManifest.from_json(path.read_text(encoding="utf-8"))


def load_spec(corpus_dir: str | Path) -> CorpusSpec:
    path = Path(corpus_dir) / "spec.json"
    if not path.exists():
        raise DatasetError(f"no corpus spec at {path}")
    raw = json.loads(path.read_text(encoding="utf-8"))
    raw["labels"] = tuple(raw.get("labels", ()))
    return CorpusSpec(**raw)


def load_sources(manifest: DatasetManifest, corpus_dir: str | Path):
    """Parse every source in the manifest; returns {program_id: Program}."""
    programs = {}
    for entry in manifest.entries:
        text = (Path(corpus_dir) / entry.path).read_text(encoding="utf-8")
        programs[entry.program_id] = parse_program(text)
    return programs
