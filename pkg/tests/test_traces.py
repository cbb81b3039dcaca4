"""Trace projections, path grouping, blending, reduction, and the JSONL store."""
from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from blendtrace import minilang as ml
from blendtrace import traces as tm

SUM_SRC = """
fn sum_array(a: int[]) {
  s: int = 0;
  for i in 0 .. len(a) {
    s += a[i];
  }
  return s;
}
"""


@pytest.fixture()
def sum_program():
    return ml.parse_program(SUM_SRC)


def run(program, **inputs):
    return ml.execute(program, inputs)


# --- projections ---------------------------------------------------------------


def test_projections_split_statements_and_states(sum_program):
    trace = run(sum_program, a=[1, 2])
    sym = tm.project_symbolic(trace)
    states = tm.project_states(trace)
    assert sym.statement_ids == trace.statement_ids
    assert states.initial_state == trace.initial_state
    assert len(states.states) == len(sym.statement_ids)
    assert states.states[-1][1] == 3  # final s


def test_empty_trace_projection_raises():
    empty = ml.ExecutionTrace(initial_state=())
    with pytest.raises(tm.TraceModelError):
        tm.project_symbolic(empty)
    with pytest.raises(tm.TraceModelError):
        tm.project_states(empty)


@given(st.lists(st.integers(0, 40), min_size=1, max_size=30))
def test_path_key_is_stable_and_length_sensitive(ids):
    key = tm.path_key(ids)
    assert key == tm.path_key(list(ids))
    assert key != tm.path_key(ids + [0])


def test_path_key_differs_on_reordering():
    assert tm.path_key([1, 2, 3]) != tm.path_key([3, 2, 1])


# --- grouping -------------------------------------------------------------------


def test_group_by_path_keys_on_trip_count(sum_program):
    # Same array length = same path; different lengths = different paths.
    batch = [
        run(sum_program, a=[5, 1]),
        run(sum_program, a=[2, 2]),
        run(sum_program, a=[7]),
        run(sum_program, a=[0, -9]),
    ]
    groups = tm.group_by_path(batch)
    assert len(groups) == 2
    first_key = tm.path_key(batch[0].statement_ids)
    assert list(groups) == [first_key, tm.path_key(batch[2].statement_ids)]  # discovery order
    assert len(groups[first_key]) == 3


# --- blending -------------------------------------------------------------------


def test_build_blended_shape(sum_program):
    concretes = [run(sum_program, a=[x, x + 1]) for x in (1, 4, -2)]
    bt = tm.build_blended(concretes, n_eps=3)
    assert bt.concrete_count == 3
    assert bt.statement_ids == concretes[0].statement_ids
    assert all(len(pair.states) == 3 for pair in bt.pairs)
    # Column c of the pair states replays concrete c's state trace.
    for c, concrete in enumerate(concretes):
        assert [pair.states[c] for pair in bt.pairs] == [s for _, s in concrete.steps]


def test_build_blended_takes_first_n(sum_program):
    concretes = [run(sum_program, a=[x, 0]) for x in range(5)]
    bt = tm.build_blended(concretes, n_eps=2)
    assert bt.concrete_count == 2
    assert bt.pairs[-1].states[0][1] == 0  # first concrete sums to 0
    assert bt.pairs[-1].states[1][1] == 1


def test_build_blended_rejects_mixed_paths_and_shortage(sum_program):
    with pytest.raises(tm.TraceModelError, match="share a path"):
        tm.build_blended([run(sum_program, a=[1]), run(sum_program, a=[1, 2])], n_eps=2)
    with pytest.raises(tm.TraceModelError, match="need 3"):
        tm.build_blended([run(sum_program, a=[1])], n_eps=3)
    with pytest.raises(tm.TraceModelError):
        tm.build_blended([run(sum_program, a=[1])], n_eps=0)


# --- downsampling ----------------------------------------------------------------


@pytest.fixture()
def blended5(sum_program):
    return tm.build_blended([run(sum_program, a=[x, 2 * x]) for x in range(5)], n_eps=5)


def test_downsample_identity(blended5):
    assert tm.downsample_concretes(blended5, 5, seed=3) is blended5


def test_downsample_is_seeded_and_order_preserving(blended5):
    a = tm.downsample_concretes(blended5, 2, seed=9)
    b = tm.downsample_concretes(blended5, 2, seed=9)
    assert a == b
    assert a.concrete_count == 2
    # Kept columns appear in their original relative order.
    full_cols = [tuple(p.states[c] for p in blended5.pairs) for c in range(5)]
    kept_cols = [tuple(p.states[c] for p in a.pairs) for c in range(2)]
    positions = [full_cols.index(col) for col in kept_cols]
    assert positions == sorted(positions)


def test_downsample_range_checks(blended5):
    with pytest.raises(tm.TraceModelError):
        tm.downsample_concretes(blended5, 0, seed=1)
    with pytest.raises(tm.TraceModelError):
        tm.downsample_concretes(blended5, 6, seed=1)


# --- greedy coverage-minimal selection ---------------------------------------------


def test_greedy_cover_forced_example():
    # A covers {b1T, b1F}; B covers {b1F}; C covers {b2T}: greedy takes A then C.
    paths = {
        "A": frozenset({(1, True), (1, False)}),
        "B": frozenset({(1, False)}),
        "C": frozenset({(2, True)}),
    }
    assert tm.select_min_coverage_set(paths) == ["A", "C"]


def test_greedy_cover_tie_breaks_to_discovery_order():
    paths = {
        "first": frozenset({(1, True)}),
        "second": frozenset({(1, True)}),
    }
    assert tm.select_min_coverage_set(paths) == ["first"]


def test_greedy_cover_preserves_union(sum_program):
    batch = [run(sum_program, a=[1] * n) for n in (1, 2, 3)] + [run(sum_program, a=[])]
    groups = tm.group_by_path(batch)
    path_branches = {k: ml.branch_coverage(v) for k, v in groups.items()}
    chosen = tm.select_min_coverage_set(path_branches)
    covered = frozenset().union(*(path_branches[k] for k in chosen))
    assert covered == frozenset().union(*path_branches.values())
    assert len(chosen) <= len(groups)


def test_greedy_cover_empty():
    assert tm.select_min_coverage_set({}) == []


# --- store round trip -----------------------------------------------------------


def test_blended_store_roundtrip(tmp_path, sum_program, blended5):
    other = tm.build_blended([run(sum_program, a=[7])] * 2, n_eps=2)
    path = tmp_path / "blended.jsonl"
    tm.write_blended_store(path, [("p0", [blended5, other]), ("p1", [other])])
    loaded = tm.read_blended_store(path)
    assert list(loaded) == ["p0", "p1"]
    assert loaded["p0"] == [blended5, other]
    assert loaded["p1"] == [other]


def test_blended_store_bytes_stable(tmp_path, blended5):
    p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    tm.write_blended_store(p1, [("p0", [blended5])])
    tm.write_blended_store(p2, [("p0", [blended5])])
    assert p1.read_bytes() == p2.read_bytes()
