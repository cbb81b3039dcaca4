"""Model contracts: vocabulary, fusion semantics, pooling, training."""
import numpy as np
import pytest

from blendtrace import nd
from blendtrace.minilang import BOTTOM, execute, parse_program, random_inputs
from blendtrace.model import (
    ABLATIONS,
    BOTTOM_TOKEN,
    PAD,
    SPECIALS,
    UNK,
    ModelConfig,
    TrainConfig,
    Vocab,
    classify,
    config_fingerprint,
    encode_blended,
    encode_statement,
    encode_state,
    forward_batch,
    fuse_step,
    init_params,
    macro_f1,
    make_batch,
    metrics_csv,
    pack_program,
    param_names,
    pool_program,
    predict_program,
    state_tokens,
    train_classifier,
    value_tokens,
)
from blendtrace.nd import Tensor
from blendtrace.nd.gradcheck import max_gradcheck_error
from blendtrace.traces import build_blended, group_by_path

SUM_SRC = """
fn sum_array(a: int[]) {
  s: int = 0;
  for i in 0 .. len(a) {
    s = s + a[i];
  }
  return s;
}
"""

MAX_SRC = """
fn find_max(a: int[]) {
  best: int = a[0];
  for i in 1 .. len(a) {
    if (a[i] > best) {
      best = a[i];
    }
  }
  return best;
}
"""

TINY_SRC = """
fn bump(x: int) {
  x = x + 1;
  return x;
}
"""


def _blend(src: str, n_eps: int, runs: int = 40, seed: int = 9, max_paths: int = 4):
    program = parse_program(src)
    traces = [execute(program, b) for b in random_inputs(program, runs, seed=seed)]
    blended = [
        build_blended(group[:n_eps], n_eps)
        for group in group_by_path(traces).values()
        if len(group) >= n_eps
    ]
    assert blended, "fixture needs at least one blended trace"
    return program, blended[:max_paths]


def _vocab_for(programs, blended_sets) -> Vocab:
    streams = []
    for program in programs:
        streams.extend(st.tokens for st in program.statements)
    for blended in blended_sets:
        for bt in blended:
            for pair in bt.pairs:
                streams.extend(state_tokens(s) for s in pair.states)
    return Vocab.build(streams)


def _fixture(n_eps=2, d=6, ablation="full", cell="tanh", n_labels=3, seed=0):
    program, blended = _blend(SUM_SRC, n_eps)
    vocab = _vocab_for([program], [blended])
    config = ModelConfig(
        n_labels=n_labels,
        d_embed=d,
        d_hidden=d,
        n_eps=n_eps,
        ablation=ablation,
        cell=cell,
        max_paths=6,
        max_steps=80,
    )
    params = init_params(config, len(vocab), seed)
    return program, blended, vocab, config, params


def _zero_params(params):
    return {k: Tensor(np.zeros_like(v.data), requires_grad=True) for k, v in params.items()}


# --- vocabulary -----------------------------------------------------------------


def test_vocab_specials_and_ordering():
    v = Vocab.build([["zeta", "alpha"], ["alpha", "5"]])
    assert v.tokens[:5] == SPECIALS
    assert v.tokens[5:] == ("5", "alpha", "zeta")
    assert v.encode("alpha") == v.index["alpha"]
    assert v.encode("never-seen") == v.unk_id
    assert len(v) == 8


def test_vocab_rejects_bad_layout():
    with pytest.raises(ValueError):
        Vocab(("a", "b"))
    with pytest.raises(ValueError):
        Vocab(SPECIALS + ("x", "x"))


def test_vocab_hash_and_roundtrip():
    v = Vocab.build([["a", "b"]])
    w = Vocab.from_json(v.to_json())
    assert w.tokens == v.tokens
    assert w.vocab_hash() == v.vocab_hash()
    assert Vocab.build([["a", "c"]]).vocab_hash() != v.vocab_hash()


def test_value_tokens():
    assert value_tokens(BOTTOM) == [BOTTOM_TOKEN]
    assert value_tokens(True) == ["true"]
    assert value_tokens(False) == ["false"]
    assert value_tokens(7) == ["7"]
    assert value_tokens(-64) == ["-64"]
    assert value_tokens(64) == ["64"]
    assert value_tokens(65) == [UNK]
    assert value_tokens(-1000) == [UNK]
    assert value_tokens((2, -3)) == ["[", "2", "-3", "]"]
    assert state_tokens(((1, 2), BOTTOM, 5)) == ["[", "1", "2", "]", BOTTOM_TOKEN, "5"]


# --- configuration ----------------------------------------------------------------


def test_model_config_defaults_and_validation():
    cfg = ModelConfig(n_labels=4)
    assert (cfg.d_embed, cfg.d_hidden, cfg.n_eps, cfg.max_paths) == (100, 100, 5, 18)
    assert cfg.max_steps == 200
    with pytest.raises(ValueError):
        ModelConfig(n_labels=0)
    with pytest.raises(ValueError):
        ModelConfig(n_labels=2, ablation="everything")
    with pytest.raises(ValueError):
        ModelConfig(n_labels=2, cell="lstm")
    with pytest.raises(ValueError):
        TrainConfig(lr=0.0)


def test_config_fingerprint_sensitivity():
    a = config_fingerprint(ModelConfig(n_labels=2), "aaaa")
    b = config_fingerprint(ModelConfig(n_labels=2, ablation="static_only"), "aaaa")
    c = config_fingerprint(ModelConfig(n_labels=2), "bbbb")
    assert len(a) == 16
    assert len({a, b, c}) == 3
    assert config_fingerprint(ModelConfig(n_labels=2), "aaaa") == a


# --- parameters ---------------------------------------------------------------------


def test_param_sets_per_ablation():
    base = dict(n_labels=2, d_embed=4, d_hidden=4, n_eps=2)
    names = {abl: set(param_names(ModelConfig(ablation=abl, **base))) for abl in ABLATIONS}
    assert {"embed", "f1_w", "f1_v", "f2_w", "f2_v", "f3_w", "f3_v", "a1_u", "a1_c", "a1_v", "Z"} == names["full"]
    assert "f2_w" not in names["static_only"] and "a1_u" not in names["static_only"]
    assert "f1_w" not in names["dynamic_only"] and "a1_u" in names["dynamic_only"]
    assert "a1_u" not in names["no_attention"] and "f1_w" in names["no_attention"]


def test_init_params_range_and_determinism():
    cfg = ModelConfig(n_labels=3, d_embed=5, d_hidden=7, n_eps=2)
    p1 = init_params(cfg, vocab_size=11, seed=42)
    p2 = init_params(cfg, vocab_size=11, seed=42)
    p3 = init_params(cfg, vocab_size=11, seed=43)
    assert p1["embed"].shape == (11, 5)
    assert p1["f1_w"].shape == (5, 7)
    assert p1["f3_w"].shape == (7, 7)
    assert p1["Z"].shape == (7, 3)
    assert p1["a1_v"].shape == (7, 1)
    for name in p1:
        assert np.array_equal(p1[name].data, p2[name].data)
        assert np.abs(p1[name].data).max() <= 0.08
    assert not np.array_equal(p1["embed"].data, p3["embed"].data)


def test_gru_params_exist_and_run():
    program, blended, vocab, config, params = _fixture(cell="gru", d=4)
    assert "f1_zw" in params and "f3_nv" in params
    packed = pack_program(program, blended, vocab, config, label=0)
    logits, _ = forward_batch(params, config, make_batch([packed], config.n_eps))
    loss = nd.cross_entropy_logits(logits, np.array([0]))
    nd.backward(loss)
    assert params["f3_zw"].grad is not None


# --- per-item encoders ------------------------------------------------------------


def test_encode_statement_contracts():
    _, _, vocab, config, params = _fixture()
    ids_a = vocab.encode_all(["i", "+=", "i"])
    ids_b = vocab.encode_all(["i", "*=", "2"])
    h_a = encode_statement(ids_a, params, config)
    h_b = encode_statement(ids_b, params, config)
    assert h_a.shape == (1, config.d_hidden)
    assert not np.allclose(h_a.data, h_b.data)
    zero = _zero_params(params)
    assert np.all(encode_statement(ids_a, zero, config).data == 0.0)
    with pytest.raises(ValueError):
        encode_statement(np.array([], dtype=np.int64), params, config)


def test_encode_state_contracts():
    _, _, vocab, config, params = _fixture()
    h1 = encode_state((7,), params, config, vocab)
    h2 = encode_state((7,), params, config, vocab)
    assert h1.shape == (1, config.d_hidden)
    assert np.array_equal(h1.data, h2.data)  # same values ⇒ same encoding
    h3 = encode_state((8,), params, config, vocab)
    assert not np.allclose(h1.data, h3.data)


# --- fusion ----------------------------------------------------------------------


def _random_vectors(rng, n, d):
    return [Tensor(rng.normal(size=(1, d))) for _ in range(n)]


def test_fuse_first_pair_exactly_uniform():
    _, _, _, config, params = _fixture()
    rng = np.random.default_rng(0)
    h_stmt, *states = _random_vectors(rng, 3, config.d_hidden)
    out, weights = fuse_step(h_stmt, states, None, params, "full")
    assert np.array_equal(weights, np.full(3, 1.0 / 3.0))
    manual = (h_stmt.data + states[0].data + states[1].data) / 3.0
    assert np.allclose(out.data, manual, atol=1e-15)


def test_fuse_weights_match_scorer_closed_form():
    _, _, _, config, params = _fixture()
    rng = np.random.default_rng(1)
    h_stmt, s1, s2 = _random_vectors(rng, 3, config.d_hidden)
    h_prev = Tensor(rng.normal(size=(1, config.d_hidden)))
    out, weights = fuse_step(h_stmt, [s1, s2], h_prev, params, "full")
    items = np.concatenate([h_stmt.data, s1.data, s2.data], axis=0)
    scores = np.tanh(items @ params["a1_u"].data + h_prev.data @ params["a1_c"].data)
    scores = (scores @ params["a1_v"].data).ravel()
    manual = np.exp(scores - scores.max())
    manual /= manual.sum()
    assert np.allclose(weights, manual, atol=1e-12)
    assert np.allclose(out.data, (manual[:, None] * items).sum(axis=0, keepdims=True), atol=1e-12)
    # spec closed form: scores (ln2, 0, 0) → weights (0.5, 0.25, 0.25)
    ref = np.exp([np.log(2.0), 0.0, 0.0])
    assert np.allclose(ref / ref.sum(), [0.5, 0.25, 0.25], atol=1e-12)


def test_fuse_normalization_many_random_steps():
    _, _, _, config, params = _fixture()
    rng = np.random.default_rng(7)
    for _ in range(200):
        h_stmt, *states = _random_vectors(rng, 1 + config.n_eps, config.d_hidden)
        h_prev = Tensor(rng.normal(size=(1, config.d_hidden)))
        _, w = fuse_step(h_stmt, states, h_prev, params, "full")
        assert abs(w.sum() - 1.0) <= 1e-9
        assert np.all(w > 0)


def test_fuse_ablation_exactness():
    _, _, _, config, params = _fixture()
    rng = np.random.default_rng(3)
    h_stmt, *states = _random_vectors(rng, 5, config.d_hidden)
    h_prev = Tensor(rng.normal(size=(1, config.d_hidden)))

    out, w = fuse_step(h_stmt, states, h_prev, params, "static_only")
    assert out is h_stmt  # bit-equal by identity
    assert np.array_equal(w, np.array([1.0]))

    out, w = fuse_step(h_stmt, states, h_prev, params, "no_attention")
    assert np.array_equal(w, np.full(5, 0.2))

    out, w = fuse_step(None, states, h_prev, params, "dynamic_only")
    assert len(w) == 4
    assert abs(w.sum() - 1.0) <= 1e-9

    out, w = fuse_step(None, states, None, params, "dynamic_only")
    assert np.array_equal(w, np.full(4, 0.25))

    with pytest.raises(ValueError):
        fuse_step(None, states, h_prev, params, "full")
    with pytest.raises(ValueError):
        fuse_step(None, [], h_prev, params, "static_only")


# --- blended-trace encoding ---------------------------------------------------------


def test_encode_blended_prefixes():
    program, blended, vocab, config, params = _fixture()
    bt = blended[0]
    seqs = [vocab.encode_all(program.statements[sid].tokens) for sid in bt.statement_ids]
    final, prefixes = encode_blended(bt, seqs, params, config, vocab)
    assert len(prefixes) == len(bt.pairs) <= config.max_steps
    assert final is prefixes[-1]
    assert final.shape == (1, config.d_hidden)
    zero = _zero_params(params)
    final0, _ = encode_blended(bt, seqs, zero, config, vocab)
    assert np.all(final0.data == 0.0)


def test_encode_blended_truncates():
    program, blended, vocab, config, params = _fixture()
    short = ModelConfig(
        n_labels=config.n_labels,
        d_embed=config.d_embed,
        d_hidden=config.d_hidden,
        n_eps=config.n_eps,
        max_paths=config.max_paths,
        max_steps=3,
    )
    bt = blended[0]
    seqs = [vocab.encode_all(program.statements[sid].tokens) for sid in bt.statement_ids]
    _, prefixes = encode_blended(bt, seqs, params, short, vocab)
    assert len(prefixes) == 3


# --- pooling and classification --------------------------------------------------------


def test_pool_program_elementwise_max():
    a = Tensor(np.array([[1.0, -2.0]]))
    b = Tensor(np.array([[0.0, 3.0]]))
    pooled = pool_program([a, b])
    assert np.array_equal(pooled.data, np.array([[1.0, 3.0]]))
    assert pool_program([a]) is a
    assert np.array_equal(pool_program([b, a]).data, pooled.data)
    with pytest.raises(ValueError):
        pool_program([])


def test_classify_uniform_under_zero_weights():
    _, _, _, config, params = _fixture(n_labels=4)
    zero = _zero_params(params)
    h_p = Tensor(np.random.default_rng(0).normal(size=(1, config.d_hidden)))
    probs = classify(h_p, zero)
    assert np.allclose(probs.data, 0.25, atol=1e-12)
    probs2 = classify(h_p, params)
    assert abs(probs2.data.sum() - 1.0) <= 1e-9


def test_predict_program_order_invariant():
    program, blended, vocab, config, params = _fixture()
    label, probs = predict_program(program, blended, params, config, vocab)
    label_r, probs_r = predict_program(program, list(reversed(blended)), params, config, vocab)
    assert label == label_r
    assert np.array_equal(probs, probs_r)  # bit-identical


# --- packing -------------------------------------------------------------------------


def test_pack_dedups_statements_and_states():
    program, blended, vocab, config, params = _fixture()
    packed = pack_program(program, blended, vocab, config, label=2, program_id="x1")
    total_steps = sum(len(bt.pairs) for bt in blended)
    assert packed.label == 2 and packed.program_id == "x1"
    assert len(packed.stmt_seqs) <= len(program.statements)
    assert len(packed.stmt_seqs) < total_steps  # loop statements repeat
    assert len(packed.path_stmt_idx) == len(blended)
    for srow, drow in zip(packed.path_stmt_idx, packed.path_state_idx):
        assert drow.shape == (len(srow), config.n_eps)
        assert srow.max() < len(packed.stmt_seqs)
        assert drow.max() < len(packed.state_seqs)


def test_pack_requires_enough_concretes():
    program, blended, vocab, config, _ = _fixture(n_eps=2)
    big = ModelConfig(n_labels=3, d_embed=6, d_hidden=6, n_eps=5)
    with pytest.raises(ValueError):
        pack_program(program, blended, vocab, big, label=0)
    with pytest.raises(ValueError):
        pack_program(program, [], vocab, config, label=0)


def test_make_batch_shapes_and_mask():
    program, blended, vocab, config, _ = _fixture()
    packed = pack_program(program, blended, vocab, config, label=1)
    batch = make_batch([packed, packed], config.n_eps)
    p_total = 2 * len(blended)
    assert batch.path_stmt_idx.shape[0] == p_total
    assert batch.path_state_idx.shape[2] == config.n_eps
    assert batch.step_mask.shape == batch.path_stmt_idx.shape
    assert batch.path_slices == [(0, len(blended)), (len(blended), len(blended))]
    assert np.array_equal(batch.labels, np.array([1, 1]))
    # identical programs share every unique sequence
    assert len(batch.stmt_seqs) == len(packed.stmt_seqs)
    assert len(batch.state_seqs) == len(packed.state_seqs)
    lengths = [len(row) for row in packed.path_stmt_idx]
    for p, length in enumerate(lengths):
        assert batch.step_mask[p, :length].all()
        assert not batch.step_mask[p, length:].any()


# --- batched vs per-item agreement ------------------------------------------------------


@pytest.mark.parametrize("ablation", ABLATIONS)
def test_forward_batch_matches_per_item(ablation):
    program, blended, vocab, config, params = _fixture(ablation=ablation)
    packed = pack_program(program, blended, vocab, config, label=0)
    batch = make_batch([packed], config.n_eps)
    logits, h_p = forward_batch(params, config, batch)

    embeds = []
    for bt in blended:
        seqs = [vocab.encode_all(program.statements[sid].tokens) for sid in bt.statement_ids]
        final, _ = encode_blended(bt, seqs, params, config, vocab)
        embeds.append(final)
    h_ref = pool_program(embeds)
    assert np.allclose(h_p.data, h_ref.data, atol=1e-9)
    assert np.allclose(logits.data, (h_ref @ params["Z"]).data, atol=1e-9)


# --- end-to-end gradient check -----------------------------------------------------------


def test_end_to_end_gradcheck_two_pair_toy():
    program, blended = _blend(TINY_SRC, n_eps=2, runs=6, seed=2, max_paths=1)
    assert len(blended[0].pairs) == 2  # assign + return
    vocab = _vocab_for([program], [blended])
    config = ModelConfig(n_labels=2, d_embed=3, d_hidden=3, n_eps=2, max_paths=2, max_steps=10)
    params = init_params(config, len(vocab), seed=1)
    packed = pack_program(program, blended, vocab, config, label=1)
    batch = make_batch([packed], config.n_eps)

    def build_loss():
        logits, _ = forward_batch(params, config, batch)
        return nd.cross_entropy_logits(logits, batch.labels)

    assert max_gradcheck_error(build_loss, params) < 1e-3


@pytest.mark.parametrize("ablation", ["static_only", "dynamic_only", "no_attention"])
def test_end_to_end_gradcheck_ablations(ablation):
    program, blended = _blend(TINY_SRC, n_eps=2, runs=6, seed=2, max_paths=1)
    vocab = _vocab_for([program], [blended])
    config = ModelConfig(
        n_labels=2, d_embed=3, d_hidden=3, n_eps=2, ablation=ablation, max_paths=2, max_steps=10
    )
    params = init_params(config, len(vocab), seed=1)
    packed = pack_program(program, blended, vocab, config, label=1)
    batch = make_batch([packed], config.n_eps)

    def build_loss():
        logits, _ = forward_batch(params, config, batch)
        return nd.cross_entropy_logits(logits, batch.labels)

    assert max_gradcheck_error(build_loss, params) < 1e-3


# --- training ------------------------------------------------------------------------------


def _two_class_sets(n_eps=2, d=8):
    prog_a, blended_a = _blend(SUM_SRC, n_eps)
    prog_b, blended_b = _blend(MAX_SRC, n_eps)
    vocab = _vocab_for([prog_a, prog_b], [blended_a, blended_b])
    config = ModelConfig(
        n_labels=2, d_embed=d, d_hidden=d, n_eps=n_eps, max_paths=4, max_steps=80
    )
    pa = pack_program(prog_a, blended_a, vocab, config, label=0, program_id="a")
    pb = pack_program(prog_b, blended_b, vocab, config, label=1, program_id="b")
    train = [pa, pb, pa, pb, pa, pb]
    valid = [pa, pb]
    return train, valid, vocab, config


def test_overfit_one_batch_loss_decreases():
    train, _, vocab, config = _two_class_sets()
    params = init_params(config, len(vocab), seed=0)
    from blendtrace.nd import AdamHyper, AdamState, adam_step, clip_global_norm, zero_grads

    adam = AdamState(hyper=AdamHyper(lr=1e-3))
    batch = make_batch(train[:4], config.n_eps)
    losses = []
    for _ in range(10):
        logits, _ = forward_batch(params, config, batch)
        loss = nd.cross_entropy_logits(logits, batch.labels)
        losses.append(loss.item())
        zero_grads(params)
        nd.backward(loss)
        clip_global_norm(params, 5.0)
        adam_step(params, adam)
    assert all(b < a for a, b in zip(losses, losses[1:])), losses


def test_train_classifier_determinism_and_history():
    train, valid, vocab, config = _two_class_sets()
    tc = TrainConfig(epochs=3, batch_size=4, lr=1e-3, patience=5)
    params1, hist1 = train_classifier(train, valid, config, tc, len(vocab), seed=7)
    params2, hist2 = train_classifier(train, valid, config, tc, len(vocab), seed=7)
    assert hist1 == hist2
    for name in params1:
        assert np.array_equal(params1[name].data, params2[name].data)
    csv = metrics_csv(hist1)
    assert csv.splitlines()[0] == "epoch,loss,acc,f1"
    assert len(csv.splitlines()) == len(hist1) + 1


def test_train_single_label_immediately_perfect():
    train, valid, vocab, config = _two_class_sets()
    mono_train = [p for p in train if p.label == 0]
    mono_valid = [p for p in valid if p.label == 0]
    tc = TrainConfig(epochs=1, batch_size=4)
    _, hist = train_classifier(mono_train, mono_valid, config, tc, len(vocab), seed=0)
    assert hist[0].valid_acc == 1.0


def test_train_early_stopping_stops():
    train, valid, vocab, config = _two_class_sets()
    tc = TrainConfig(epochs=50, batch_size=4, lr=1e-3, patience=0)
    _, hist = train_classifier(train, valid, config, tc, len(vocab), seed=1)
    assert len(hist) < 50


def test_macro_f1_hand_value():
    gold = np.array([0, 0, 1, 2])
    pred = np.array([0, 1, 1, 1])
    f_class0 = 2 * (1.0 * 0.5) / 1.5
    f_class1 = 2 * ((1 / 3) * 1.0) / (1 / 3 + 1.0)
    expected = (f_class0 + f_class1 + 0.0) / 3.0
    assert abs(macro_f1(gold, pred, 3) - expected) < 1e-12
    assert macro_f1(gold, gold, 3) == 1.0
