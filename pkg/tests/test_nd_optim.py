"""Adam, clipping, RNG substreams, and checkpoint round-trips."""
from __future__ import annotations

import numpy as np
import pytest

from blendtrace import nd
from blendtrace.nd import AdamState, Tensor


def test_adam_single_step_hand_value():
    # Fresh state, param 0.5, grad 1.0, default hyper (lr 1e-4):
    # m-hat = v-hat = 1 after bias correction, so the update is lr/(1+eps).
    p = Tensor(np.array([0.5]), requires_grad=True)
    p.grad = np.array([1.0])
    state = AdamState()
    nd.adam_step({"p": p}, state)
    assert p.data[0] == pytest.approx(0.4999, abs=1e-7)
    assert state.step == 1


def test_adam_zero_grad_keeps_params():
    p = Tensor(np.array([1.0, -2.0]), requires_grad=True)
    p.grad = np.zeros(2)
    before = p.data.copy()
    nd.adam_step({"p": p}, AdamState())
    assert np.array_equal(p.data, before)


def test_adam_identical_runs_identical_params():
    def run():
        rng = nd.substream(123, "init")
        p = Tensor(nd.init_uniform(rng, (4, 3)), requires_grad=True)
        state = AdamState()
        grad_rng = nd.substream(123, "grads")
        for _ in range(5):
            p.grad = grad_rng.standard_normal(p.shape)
            nd.adam_step({"p": p}, state)
        return p.data

    assert np.array_equal(run(), run())


def test_clip_global_norm():
    a = Tensor(np.zeros(3), requires_grad=True)
    b = Tensor(np.zeros(4), requires_grad=True)
    a.grad = np.full(3, 3.0)
    b.grad = np.full(4, 4.0)
    norm = nd.clip_global_norm({"a": a, "b": b}, max_norm=5.0)
    assert norm == pytest.approx(np.sqrt(27 + 64))
    after = np.sqrt((a.grad**2).sum() + (b.grad**2).sum())
    assert after == pytest.approx(5.0)

    # Under the threshold: untouched.
    a.grad = np.full(3, 0.1)
    b.grad = np.full(4, 0.1)
    kept = a.grad.copy()
    nd.clip_global_norm({"a": a, "b": b}, max_norm=5.0)
    assert np.array_equal(a.grad, kept)


def test_substreams_are_independent_and_stable():
    assert nd.substream_seed(1, "corpus") != nd.substream_seed(1, "init")
    assert nd.substream_seed(1, "corpus") != nd.substream_seed(2, "corpus")
    assert nd.substream_seed(42, "a", "b") == nd.substream_seed(42, "a", "b")
    draws = nd.substream(9, "x").integers(0, 100, 5)
    assert np.array_equal(draws, nd.substream(9, "x").integers(0, 100, 5))


def test_init_uniform_range():
    vals = nd.init_uniform(nd.substream(0, "init"), (200, 50))
    assert vals.min() >= -0.08 and vals.max() <= 0.08
    assert abs(vals.mean()) < 0.01


def test_checkpoint_roundtrip_and_bytes(tmp_path):
    rng = nd.substream(5, "ck")
    tensors = {
        "w.a": Tensor(rng.standard_normal((3, 2))),
        "b": Tensor(rng.standard_normal(4)),
    }
    p1 = tmp_path / "one.ckpt"
    p2 = tmp_path / "two.ckpt"
    nd.save_checkpoint(p1, tensors, config_hash="abc123", seed=7)
    nd.save_checkpoint(p2, tensors, config_hash="abc123", seed=7)
    assert p1.read_bytes() == p2.read_bytes()

    arrays, config_hash, seed = nd.load_checkpoint(p1)
    assert config_hash == "abc123" and seed == 7
    assert set(arrays) == {"w.a", "b"}
    assert np.array_equal(arrays["w.a"], tensors["w.a"].data)
    assert np.array_equal(arrays["b"], tensors["b"].data)


def test_checkpoint_rejects_garbage(tmp_path):
    bad = tmp_path / "bad.ckpt"
    bad.write_bytes(b"not a checkpoint at all")
    with pytest.raises(nd.CheckpointError):
        nd.load_checkpoint(bad)
