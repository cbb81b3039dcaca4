"""Program templates for the two synthetic corpora.

Each template renders one behavior (a semantic class, or a gold method name)
into many source variants by combining independent knobs: identifier choices,
``for``/``while`` loop styles, inserted dead code, constant/copy chains,
loop-invariant decorations, and statement reorderings.  Classes end up
semantically distinct but syntactically overlapping — a one-token comparator
is all that separates the ascending and descending sorts — while variants of
one class share no source text.

Every template carries a Python reference implementation returning the same
``(return_value, (final_array,))`` shape as ``observable_state``; generation
checks each rendered variant against it and checks every label pair apart on
at least one probe input.

Identifier pools are semantically neutral and shared across behaviors so a
variable name never leaks the label (the naming task would otherwise be
readable off the statics).  The naming catalog goes further: paired names
(``sum_positive``/``count_positive``, ``find_max``/``find_min``, ...) render
*both* behaviors into every body and differ only in which accumulator feeds
the returned copy.  The statics of paired variants are then one identifier
binding apart, while the concrete values that reach the return separate the
names cleanly.
"""
from __future__ import annotations

import operator
from collections.abc import Callable, Mapping
from dataclasses import dataclass
from itertools import product

PARAMS = ("a", "xs", "ys", "q", "src", "buf")
IDX = ("i", "k", "p", "t", "u", "ii")
JDX = ("j", "m", "r", "w", "jj", "vv")
ACC = ("s", "acc", "res", "out", "agg", "cur")
TMP = ("tmp", "h", "g", "swp", "aux", "mem")
LEN = ("n", "sz")

DEAD = ("none", "int", "chain", "flag")
_DEAD_LINES = {
    "none": [],
    "int": ["  zz1: int = 7;"],
    "chain": ["  zz1: int = 3;", "  zz2: int = zz1 + 4;"],
    "flag": ["  fz: bool = false;"],
}


@dataclass(frozen=True)
class Template:
    """One behavior: knob space, source renderer, and reference semantics."""

    label: str
    knobs: tuple[tuple[str, tuple[str, ...]], ...]
    render: Callable[[Mapping[str, str]], str]
    reference: Callable[[list[int]], tuple]

    def combos(self) -> list[dict[str, str]]:
        names = [k for k, _ in self.knobs]
        spaces = [options for _, options in self.knobs]
        return [dict(zip(names, combo)) for combo in product(*spaces)]


def _fn(label: str, param: str, body: list[str]) -> str:
    lines = [f"fn {label}({param}: int[]) {{", *body, "}"]
    return "\n".join(lines) + "\n"


def _scan_loop(style: str, idx: str, lo: str, hi: str, body: list[str]) -> list[str]:
    """A loop running ``idx`` from ``lo`` (inclusive) to ``hi`` (exclusive)."""
    if style == "for":
        return [f"  for {idx} in {lo} .. {hi} {{", *[f"  {b}" for b in body], "  }"]
    return [
        f"  {idx}: int = {lo};",
        f"  while ({idx} < {hi}) {{",
        *[f"  {b}" for b in body],
        f"    {idx} = {idx} + 1;",
        "  }",
    ]


def _deco_lines(kind: str) -> list[str]:
    """In-loop lines for the decoration knob."""
    if kind == "none":
        return []
    if kind == "inv":
        # loop-invariant, fault-free, unread: a hoisting (and DCE) candidate
        return ["  hv: int = 6 * 7;"]
    raise ValueError(f"unknown decoration {kind!r}")


# --- single-scan accumulators -------------------------------------------------


def _accumulate(
    label: str,
    guard_op: str | None,
    count: bool,
    decorations: tuple[str, ...] = ("none", "inv"),
) -> Template:
    """Scan the array once, conditionally folding into one accumulator.

    ``guard_op`` compares ``arr[i]`` against 0 (``None`` = unconditional);
    ``count`` adds 1 per hit instead of the element.
    """

    def render(c: Mapping[str, str]) -> str:
        p, i, acc = c["param"], c["idx"], c["acc"]
        init = (
            [f"  {acc}: int = 0;"]
            if c["konst"] == "lit"
            else ["  vz: int = 0;", f"  {acc}: int = vz;"]
        )
        update = f"{acc} = {acc} + 1;" if count else f"{acc} = {acc} + {p}[{i}];"
        inside = _deco_lines(c["deco"])
        if guard_op is None:
            loop_body = [f"  {update}", *inside]
        else:
            loop_body = [
                f"  if ({p}[{i}] {guard_op} 0) {{",
                f"    {update}",
                "  }",
                *inside,
            ]
        body = [
            *_DEAD_LINES[c["dead"]],
            *init,
            *_scan_loop(c["loop"], i, "0", f"len({p})", loop_body),
            f"  return {acc};",
        ]
        return _fn(label, p, body)

    ops = {">": operator.gt, "<": operator.lt, "==": operator.eq}

    def reference(arr: list[int]) -> tuple:
        if guard_op is None:
            hits = list(arr)
        else:
            hits = [v for v in arr if ops[guard_op](v, 0)]
        total = len(hits) if count else sum(hits)
        return (total, (tuple(arr),))

    return Template(
        label=label,
        knobs=(
            ("param", PARAMS),
            ("idx", IDX),
            ("acc", ACC),
            ("loop", ("for", "while")),
            ("dead", DEAD),
            ("konst", ("lit", "chain")),
            ("deco", decorations),
        ),
        render=render,
        reference=reference,
    )


# --- extremum scans -------------------------------------------------------------


def _extremum(label: str, op: str, decorations: tuple[str, ...] = ("none", "inv")) -> Template:
    def render(c: Mapping[str, str]) -> str:
        p, i, acc = c["param"], c["idx"], c["acc"]
        start = ["  st: int = 1;"] if c["konst"] == "chain" else []
        lo = "st" if c["konst"] == "chain" else "1"
        inside = _deco_lines(c["deco"])
        loop_body = [
            f"  if ({p}[{i}] {op} {acc}) {{",
            f"    {acc} = {p}[{i}];",
            "  }",
            *inside,
        ]
        body = [
            *_DEAD_LINES[c["dead"]],
            f"  {acc}: int = {p}[0];",
            *start,
            *_scan_loop(c["loop"], i, lo, f"len({p})", loop_body),
            f"  return {acc};",
        ]
        return _fn(label, p, body)

    def reference(arr: list[int]) -> tuple:
        best = max(arr) if op == ">" else min(arr)
        return (best, (tuple(arr),))

    return Template(
        label=label,
        knobs=(
            ("param", PARAMS),
            ("idx", IDX),
            ("acc", ACC),
            ("loop", ("for", "while")),
            ("dead", DEAD),
            ("konst", ("lit", "chain")),
            ("deco", decorations),
        ),
        render=render,
        reference=reference,
    )


def _max_diff(label: str = "max_diff", decorations: tuple[str, ...] = ("none", "inv")) -> Template:
    def render(c: Mapping[str, str]) -> str:
        p, i, hi, lo = c["param"], c["idx"], c["acc"], c["second"]
        inside = _deco_lines(c["deco"])
        branches = [
            [f"  if ({p}[{i}] > {hi}) {{", f"    {hi} = {p}[{i}];", "  }"],
            [f"  if ({p}[{i}] < {lo}) {{", f"    {lo} = {p}[{i}];", "  }"],
        ]
        decls = [f"  {hi}: int = {p}[0];", f"  {lo}: int = {p}[0];"]
        if c["order"] == "rev":
            branches.reverse()
            decls.reverse()
        loop_body = [*branches[0], *branches[1], *inside]
        body = [
            *_DEAD_LINES[c["dead"]],
            *decls,
            *_scan_loop(c["loop"], i, "1", f"len({p})", loop_body),
            f"  return {hi} - {lo};",
        ]
        return _fn(label, p, body)

    def reference(arr: list[int]) -> tuple:
        return (max(arr) - min(arr), (tuple(arr),))

    return Template(
        label=label,
        knobs=(
            ("param", PARAMS),
            ("idx", IDX),
            ("acc", ACC),
            ("second", TMP),
            ("loop", ("for", "while")),
            ("dead", DEAD),
            ("order", ("fwd", "rev")),
            ("deco", decorations),
        ),
        render=render,
        reference=reference,
    )


# --- array mutators ----------------------------------------------------------------


def _reverse(label: str = "reverse_array") -> Template:
    def render(c: Mapping[str, str]) -> str:
        p, i, j, tmp, n = c["param"], c["idx"], c["jdx"], c["tmp"], c["len"]
        swap = [
            f"    {tmp}: int = {p}[{i}];",
            f"    {p}[{i}] = {p}[{j}];",
            f"    {p}[{j}] = {tmp};",
        ]
        if c["loop"] == "for":
            loop = [
                f"  {j}: int = 0;",
                f"  for {i} in 0 .. {n} / 2 {{",
                f"    {j} = {n} - 1 - {i};",
                *swap,
                "  }",
            ]
        else:
            decls = [f"  {i}: int = 0;", f"  {j}: int = {n} - 1;"]
            if c["loop"] == "while_ji":
                decls.reverse()
            loop = [
                *decls,
                f"  while ({i} < {j}) {{",
                *swap,
                f"    {i} = {i} + 1;",
                f"    {j} = {j} - 1;",
                "  }",
            ]
        body = [
            *_DEAD_LINES[c["dead"]],
            f"  {n}: int = len({p});",
            *loop,
            f"  return {n};",
        ]
        return _fn(label, p, body)

    def reference(arr: list[int]) -> tuple:
        return (len(arr), (tuple(reversed(arr)),))

    return Template(
        label=label,
        knobs=(
            ("param", PARAMS),
            ("idx", IDX),
            ("jdx", JDX),
            ("tmp", TMP),
            ("len", LEN),
            ("loop", ("for", "while_ij", "while_ji")),
            ("dead", DEAD),
        ),
        render=render,
        reference=reference,
    )


def _bubble(label: str, op: str) -> Template:
    """Bubble sort; ascending for ``>`` swaps, descending for ``<``."""

    def render(c: Mapping[str, str]) -> str:
        p, i, j, tmp, n = c["param"], c["idx"], c["jdx"], c["tmp"], c["len"]
        swap = [
            f"  if ({p}[{j}] {op} {p}[{j} + 1]) {{",
            f"    {tmp}: int = {p}[{j}];",
            f"    {p}[{j}] = {p}[{j} + 1];",
            f"    {p}[{j} + 1] = {tmp};",
            "  }",
        ]
        if c["inner"] == "for":
            inner = [
                f"  for {j} in 0 .. {n} - 1 - {i} {{",
                *[f"  {line}" for line in swap],
                "  }",
            ]
        else:
            inner = [
                f"  {j}: int = 0;",
                f"  while ({j} < {n} - 1 - {i}) {{",
                *[f"  {line}" for line in swap],
                f"    {j} = {j} + 1;",
                "  }",
            ]
        if c["outer"] == "for":
            outer = [f"  for {i} in 0 .. {n} - 1 {{", *[f"  {line}" for line in inner], "  }"]
        else:
            outer = [
                f"  {i}: int = 0;",
                f"  while ({i} < {n} - 1) {{",
                *[f"  {line}" for line in inner],
                f"    {i} = {i} + 1;",
                "  }",
            ]
        body = [
            *_DEAD_LINES[c["dead"]],
            f"  {n}: int = len({p});",
            *outer,
            f"  return {n};",
        ]
        return _fn(label, p, body)

    def reference(arr: list[int]) -> tuple:
        return (len(arr), (tuple(sorted(arr, reverse=op == "<")),))

    return Template(
        label=label,
        knobs=(
            ("param", PARAMS),
            ("idx", IDX),
            ("jdx", JDX),
            ("tmp", TMP),
            ("len", LEN),
            ("outer", ("for", "while")),
            ("inner", ("for", "while")),
            ("dead", DEAD),
        ),
        render=render,
        reference=reference,
    )


# --- mirrored name pairs -------------------------------------------------------------
#
# Each builder returns two templates that render the *same* body — both
# behaviors computed side by side — and differ only in which accumulator is
# copied into the returned variable.  Identifier pairs cycle through a shared
# pool so an id never hints at its role, and declaration/update order knobs
# keep position from hinting either.

_BIND = ACC + TMP
_BIND_PAIRS = tuple(
    f"{_BIND[i]},{_BIND[(i + k) % len(_BIND)]}" for k in (1, 7) for i in range(len(_BIND))
)
_ARG_IDS = tuple(
    f"{ACC[i]},{TMP[i]},{ACC[(i + k) % 6]},{TMP[(i + k) % 6]}" for k in (1, 5) for i in range(6)
)
_OUT = ("j", "w", "m")

_PAIR_KNOBS = (
    ("param", PARAMS),
    ("idx", IDX),
    ("ids", _BIND_PAIRS),
    ("out", _OUT),
    ("loop", ("for", "while")),
    ("dead", DEAD),
    ("decl", ("ab", "ba")),
    ("upd", ("ab", "ba")),
)


def _pair_body(c: Mapping[str, str], decls: list[str], loop: list[str], ret: str) -> list[str]:
    return [
        *_DEAD_LINES[c["dead"]],
        *decls,
        *loop,
        f"  {c['out']}: int = {ret};",
        f"  return {c['out']};",
    ]


def _sum_count_pair(sum_label: str, count_label: str, guard_op: str) -> tuple[Template, Template]:
    """Guarded scan updating a sum and a hit counter; the copy picks the name."""

    def render_for(role: str, label: str) -> Callable[[Mapping[str, str]], str]:
        def render(c: Mapping[str, str]) -> str:
            p, i = c["param"], c["idx"]
            s, k = c["ids"].split(",")
            decls = [f"  {s}: int = 0;", f"  {k}: int = 0;"]
            if c["decl"] == "ba":
                decls.reverse()
            updates = [f"    {s} = {s} + {p}[{i}];", f"    {k} = {k} + 1;"]
            if c["upd"] == "ba":
                updates.reverse()
            loop_body = [f"  if ({p}[{i}] {guard_op} 0) {{", *updates, "  }"]
            loop = _scan_loop(c["loop"], i, "0", f"len({p})", loop_body)
            return _fn(label, p, _pair_body(c, decls, loop, s if role == "sum" else k))

        return render

    op = operator.gt if guard_op == ">" else operator.lt

    def ref_sum(arr: list[int]) -> tuple:
        return (sum(v for v in arr if op(v, 0)), (tuple(arr),))

    def ref_count(arr: list[int]) -> tuple:
        return (sum(1 for v in arr if op(v, 0)), (tuple(arr),))

    return (
        Template(sum_label, _PAIR_KNOBS, render_for("sum", sum_label), ref_sum),
        Template(count_label, _PAIR_KNOBS, render_for("count", count_label), ref_count),
    )


def _sum_zero_pair(sum_label: str, zero_label: str) -> tuple[Template, Template]:
    """Unguarded sum next to a zero counter; the copy picks the name."""

    def render_for(role: str, label: str) -> Callable[[Mapping[str, str]], str]:
        def render(c: Mapping[str, str]) -> str:
            p, i = c["param"], c["idx"]
            s, k = c["ids"].split(",")
            decls = [f"  {s}: int = 0;", f"  {k}: int = 0;"]
            if c["decl"] == "ba":
                decls.reverse()
            updates = [
                [f"  {s} = {s} + {p}[{i}];"],
                [f"  if ({p}[{i}] == 0) {{", f"    {k} = {k} + 1;", "  }"],
            ]
            if c["upd"] == "ba":
                updates.reverse()
            loop = _scan_loop(c["loop"], i, "0", f"len({p})", [*updates[0], *updates[1]])
            return _fn(label, p, _pair_body(c, decls, loop, s if role == "sum" else k))

        return render

    def ref_sum(arr: list[int]) -> tuple:
        return (sum(arr), (tuple(arr),))

    def ref_zero(arr: list[int]) -> tuple:
        return (arr.count(0), (tuple(arr),))

    return (
        Template(sum_label, _PAIR_KNOBS, render_for("sum", sum_label), ref_sum),
        Template(zero_label, _PAIR_KNOBS, render_for("zero", zero_label), ref_zero),
    )


def _minmax_pair(max_label: str, min_label: str) -> tuple[Template, Template]:
    """Track the running max and min together; the copy picks the name."""

    def render_for(role: str, label: str) -> Callable[[Mapping[str, str]], str]:
        def render(c: Mapping[str, str]) -> str:
            p, i = c["param"], c["idx"]
            hi, lo = c["ids"].split(",")
            decls = [f"  {hi}: int = {p}[0];", f"  {lo}: int = {p}[0];"]
            if c["decl"] == "ba":
                decls.reverse()
            arms = [
                [f"  if ({p}[{i}] > {hi}) {{", f"    {hi} = {p}[{i}];", "  }"],
                [f"  if ({p}[{i}] < {lo}) {{", f"    {lo} = {p}[{i}];", "  }"],
            ]
            if c["upd"] == "ba":
                arms.reverse()
            loop = _scan_loop(c["loop"], i, "1", f"len({p})", [*arms[0], *arms[1]])
            return _fn(label, p, _pair_body(c, decls, loop, hi if role == "max" else lo))

        return render

    def ref_max(arr: list[int]) -> tuple:
        return (max(arr), (tuple(arr),))

    def ref_min(arr: list[int]) -> tuple:
        return (min(arr), (tuple(arr),))

    return (
        Template(max_label, _PAIR_KNOBS, render_for("max", max_label), ref_max),
        Template(min_label, _PAIR_KNOBS, render_for("min", min_label), ref_min),
    )


def _argpos_pair(max_label: str, min_label: str) -> tuple[Template, Template]:
    """Track argmax and argmin positions together; the copy picks the name."""
    knobs = tuple(("ids", _ARG_IDS) if name == "ids" else (name, opts) for name, opts in _PAIR_KNOBS)

    def render_for(role: str, label: str) -> Callable[[Mapping[str, str]], str]:
        def render(c: Mapping[str, str]) -> str:
            p, i = c["param"], c["idx"]
            bv, bi, sv, si = c["ids"].split(",")
            groups = [
                [f"  {bv}: int = {p}[0];", f"  {bi}: int = 0;"],
                [f"  {sv}: int = {p}[0];", f"  {si}: int = 0;"],
            ]
            if c["decl"] == "ba":
                groups.reverse()
            arms = [
                [f"  if ({p}[{i}] > {bv}) {{", f"    {bv} = {p}[{i}];", f"    {bi} = {i};", "  }"],
                [f"  if ({p}[{i}] < {sv}) {{", f"    {sv} = {p}[{i}];", f"    {si} = {i};", "  }"],
            ]
            if c["upd"] == "ba":
                arms.reverse()
            loop = _scan_loop(c["loop"], i, "1", f"len({p})", [*arms[0], *arms[1]])
            decls = [*groups[0], *groups[1]]
            return _fn(label, p, _pair_body(c, decls, loop, bi if role == "max" else si))

        return render

    def ref_imax(arr: list[int]) -> tuple:
        return (arr.index(max(arr)), (tuple(arr),))

    def ref_imin(arr: list[int]) -> tuple:
        return (arr.index(min(arr)), (tuple(arr),))

    return (
        Template(max_label, knobs, render_for("max", max_label), ref_imax),
        Template(min_label, knobs, render_for("min", min_label), ref_imin),
    )


# --- catalogs ----------------------------------------------------------------------


def classification_templates() -> tuple[Template, ...]:
    """Six semantic classes; the two sorts differ by a single comparator token."""
    return (
        _accumulate("array_sum", guard_op=None, count=False),
        _bubble("bubble_sort_asc", ">"),
        _extremum("find_max", ">"),
        _max_diff("max_diff"),
        _reverse("reverse_array"),
        _bubble("sort_desc", "<"),
    )


def naming_templates() -> tuple[Template, ...]:
    """Twelve gold names: five mirrored pairs plus two singleton behaviors."""
    sum_pos, count_pos = _sum_count_pair("sum_positive", "count_positive", ">")
    sum_neg, count_neg = _sum_count_pair("sum_negative", "count_negative", "<")
    sum_all, count_zero = _sum_zero_pair("sum_array", "count_zero")
    find_max, find_min = _minmax_pair("find_max", "find_min")
    index_max, index_min = _argpos_pair("index_of_max", "index_of_min")
    return (
        count_neg,
        count_pos,
        count_zero,
        find_max,
        find_min,
        index_max,
        index_min,
        _max_diff("max_diff"),
        _reverse("reverse_array"),
        sum_all,
        sum_neg,
        sum_pos,
    )
