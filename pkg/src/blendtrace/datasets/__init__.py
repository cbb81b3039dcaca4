"""Synthetic corpora: generation, manifests, tracing, and packing."""
from .corpus import (
    FIXED_PROBES,
    SPLITS,
    CorpusSpec,
    DatasetError,
    DatasetManifest,
    ManifestEntry,
    behavior_fingerprint,
    check_separation,
    gen_classification_corpus,
    gen_naming_corpus,
    load_manifest,
    load_sources,
    load_spec,
    probe_arrays,
    spec_hash,
)
from .templates import Template, classification_templates, naming_templates
from .tracing import (
    Coverage,
    PackedSplit,
    TraceReport,
    build_vocab,
    coverage_path_for,
    execution_count,
    input_config,
    label_map,
    load_store,
    pack_corpus,
    read_coverage,
    reduce_store,
    trace_corpus,
    trace_program,
    write_coverage,
)

__all__ = [
    "FIXED_PROBES",
    "SPLITS",
    "CorpusSpec",
    "Coverage",
    "DatasetError",
    "DatasetManifest",
    "ManifestEntry",
    "PackedSplit",
    "Template",
    "TraceReport",
    "behavior_fingerprint",
    "build_vocab",
    "check_separation",
    "classification_templates",
    "coverage_path_for",
    "execution_count",
    "gen_classification_corpus",
    "gen_naming_corpus",
    "input_config",
    "label_map",
    "load_manifest",
    "load_sources",
    "load_spec",
    "load_store",
    "naming_templates",
    "pack_corpus",
    "probe_arrays",
    "read_coverage",
    "reduce_store",
    "spec_hash",
    "trace_corpus",
    "trace_program",
    "write_coverage",
]
