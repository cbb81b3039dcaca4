"""Tracing interpreter: execute a program and record one step per statement.

A trace starts at the initial state (params bound, locals at the ⊥ sentinel)
and appends an (statement-id, post-state) pair for every executed statement —
including one pair per guard evaluation, so loop trip counts are visible.
States are tuples over all declared variables in declaration order; arrays
are snapshotted as tuples.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .nodes import (
    BOOL,
    INT,
    INT_ARRAY,
    MAX_ARRAY_LEN,
    ArrayLit,
    Assign,
    Binary,
    BoolLit,
    Call,
    Decl,
    Expr,
    For,
    If,
    IntLit,
    Index,
    Len,
    Program,
    Return,
    Stmt,
    Unary,
    Var,
    While,
)
from .parser import MinilangError

_INT_BOUND = 2**63  # 64-bit signed magnitude limit


class _Bottom:
    """The ⊥ sentinel: declared but not yet assigned."""

    __slots__ = ()

    def __repr__(self) -> str:
        return "⊥"


BOTTOM = _Bottom()


class RuntimeFault(MinilangError):
    """Runtime error (division by zero, bad index, ⊥ read, overflow)."""


class StepLimitExceeded(MinilangError):
    pass


@dataclass(frozen=True)
class StepLimit:
    max_steps: int = 10_000


@dataclass(frozen=True)
class InputConfig:
    int_low: int = -50
    int_high: int = 50
    array_min_len: int = 1
    array_max_len: int = MAX_ARRAY_LEN


@dataclass
class ExecutionTrace:
    initial_state: tuple
    steps: list[tuple[int, tuple]] = field(default_factory=list)
    covered: frozenset[tuple[int, bool]] = frozenset()
    return_value: Any = None
    inputs: dict[str, Any] = field(default_factory=dict)

    @property
    def statement_ids(self) -> tuple[int, ...]:
        return tuple(sid for sid, _ in self.steps)


class _ReturnSignal(Exception):
    def __init__(self, value):
        self.value = value


class _Machine:
    def __init__(self, program: Program, limit: StepLimit):
        self.program = program
        self.limit = limit
        self.env: dict[str, Any] = {}
        self.steps: list[tuple[int, tuple]] = []
        self.covered: set[tuple[int, bool]] = set()

    # -- state -------------------------------------------------------------

    def snapshot(self) -> tuple:
        out = []
        for name in self.program.variables:
            v = self.env[name]
            out.append(tuple(v) if isinstance(v, list) else v)
        return tuple(out)

    def log(self, st: Stmt) -> None:
        if len(self.steps) >= self.limit.max_steps:
            raise StepLimitExceeded(
                f"{self.program.name}: exceeded step limit {self.limit.max_steps}"
            )
        self.steps.append((st.sid, self.snapshot()))

    # -- expressions ---------------------------------------------------------

    def read(self, name: str):
        v = self.env[name]
        if v is BOTTOM:
            raise RuntimeFault(f"read of unassigned variable {name!r}")
        return v

    def eval(self, e: Expr):
        if isinstance(e, IntLit):
            return e.value
        if isinstance(e, BoolLit):
            return e.value
        if isinstance(e, Var):
            return self.read(e.name)
        if isinstance(e, Index):
            arr = self.read(e.name)
            idx = self.eval(e.index)
            if not 0 <= idx < len(arr):
                raise RuntimeFault(f"index {idx} out of bounds for {e.name!r} (len {len(arr)})")
            return arr[idx]
        if isinstance(e, Len):
            return len(self.read(e.name))
        if isinstance(e, ArrayLit):
            return [self.eval(item) for item in e.items]
        if isinstance(e, Unary):
            v = self.eval(e.operand)
            return self.check_int(-v) if e.op == "-" else (not v)
        if isinstance(e, Binary):
            if e.op == "&&":
                return bool(self.eval(e.left)) and bool(self.eval(e.right))
            if e.op == "||":
                return bool(self.eval(e.left)) or bool(self.eval(e.right))
            lv = self.eval(e.left)
            rv = self.eval(e.right)
            if e.op == "+":
                return self.check_int(lv + rv)
            if e.op == "-":
                return self.check_int(lv - rv)
            if e.op == "*":
                return self.check_int(lv * rv)
            if e.op == "/":
                if rv == 0:
                    raise RuntimeFault("division by zero")
                q = abs(lv) // abs(rv)  # truncate toward zero
                return self.check_int(q if (lv >= 0) == (rv >= 0) else -q)
            if e.op == "%":
                if rv == 0:
                    raise RuntimeFault("modulo by zero")
                q = abs(lv) // abs(rv)
                q = q if (lv >= 0) == (rv >= 0) else -q
                return self.check_int(lv - rv * q)  # remainder keeps dividend's sign
            if e.op == "==":
                return lv == rv
            if e.op == "!=":
                return lv != rv
            if e.op == "<":
                return lv < rv
            if e.op == "<=":
                return lv <= rv
            if e.op == ">":
                return lv > rv
            if e.op == ">=":
                return lv >= rv
        raise MinilangError(f"cannot evaluate {e!r}")

    @staticmethod
    def check_int(v: int) -> int:
        if not -_INT_BOUND <= v < _INT_BOUND:
            raise RuntimeFault("integer overflow")
        return v

    # -- statements ----------------------------------------------------------

    def run_block(self, body: list[Stmt]) -> None:
        for st in body:
            self.run_stmt(st)

    def guard(self, st: Stmt, outcome: bool) -> None:
        self.covered.add((st.sid, outcome))
        self.log(st)

    def run_stmt(self, st: Stmt) -> None:
        if isinstance(st, Decl):
            value = self.eval(st.init) if st.init is not None else BOTTOM
            if isinstance(value, list) and len(value) > MAX_ARRAY_LEN:
                raise RuntimeFault(f"array longer than {MAX_ARRAY_LEN}")
            self.env[st.name] = value
            self.log(st)
            return
        if isinstance(st, Assign):
            value = self.eval(st.value)
            if isinstance(st.target, Index):
                arr = self.read(st.target.name)
                idx = self.eval(st.target.index)
                if not 0 <= idx < len(arr):
                    raise RuntimeFault(
                        f"index {idx} out of bounds for {st.target.name!r} (len {len(arr)})"
                    )
                if st.op == "=":
                    arr[idx] = value
                else:
                    arr[idx] = self.apply_compound(st.op, arr[idx], value)
            else:
                name = st.target.name
                if st.op == "=":
                    self.env[name] = value
                else:
                    self.env[name] = self.apply_compound(st.op, self.read(name), value)
            self.log(st)
            return
        if isinstance(st, If):
            outcome = bool(self.eval(st.cond))
            self.guard(st, outcome)
            self.run_block(st.then_body if outcome else st.else_body)
            return
        if isinstance(st, While):
            while True:
                outcome = bool(self.eval(st.cond))
                self.guard(st, outcome)
                if not outcome:
                    return
                self.run_block(st.body)
            return
        if isinstance(st, For):
            # Each guard evaluation advances-or-initializes the induction
            # variable, re-evaluates the bound, then tests (C-style).
            self.env[st.var] = self.eval(st.lo)
            while True:
                outcome = self.env[st.var] < self.eval(st.hi)
                self.guard(st, outcome)
                if not outcome:
                    return
                self.run_block(st.body)
                self.env[st.var] = self.check_int(self.env[st.var] + 1)
            return
        if isinstance(st, Return):
            value = self.eval(st.value) if st.value is not None else None
            if isinstance(value, list):
                value = tuple(value)
            self.log(st)
            raise _ReturnSignal(value)
        if isinstance(st, Call):  # swap(a, i, j)
            arr = self.read(st.args[0].name)
            i = self.eval(st.args[1])
            j = self.eval(st.args[2])
            for idx in (i, j):
                if not 0 <= idx < len(arr):
                    raise RuntimeFault(f"swap index {idx} out of bounds (len {len(arr)})")
            arr[i], arr[j] = arr[j], arr[i]
            self.log(st)
            return
        raise MinilangError(f"cannot execute {st!r}")

    def apply_compound(self, op: str, old, value) -> int:
        if old is BOTTOM:
            raise RuntimeFault("compound assignment reads an unassigned variable")
        base = op[0]
        if base == "+":
            return self.check_int(old + value)
        if base == "-":
            return self.check_int(old - value)
        if base == "*":
            return self.check_int(old * value)
        if value == 0:
            raise RuntimeFault("division by zero" if base == "/" else "modulo by zero")
        q = abs(old) // abs(value)
        q = q if (old >= 0) == (value >= 0) else -q
        return self.check_int(q if base == "/" else old - value * q)


def _validate_inputs(program: Program, inputs: dict[str, Any]) -> dict[str, Any]:
    if set(inputs) != {name for name, _ in program.params}:
        raise ValueError(
            f"inputs {sorted(inputs)} do not match params {[n for n, _ in program.params]}"
        )
    env: dict[str, Any] = {}
    for name, t in program.params:
        v = inputs[name]
        if t == INT:
            if isinstance(v, bool) or not isinstance(v, int):
                raise ValueError(f"param {name!r} expects int")
            env[name] = int(v)
        elif t == BOOL:
            if not isinstance(v, bool):
                raise ValueError(f"param {name!r} expects bool")
            env[name] = bool(v)
        elif t == INT_ARRAY:
            if not isinstance(v, (list, tuple)):
                raise ValueError(f"param {name!r} expects an int array")
            if len(v) > MAX_ARRAY_LEN:
                raise ValueError(f"param {name!r} longer than {MAX_ARRAY_LEN}")
            env[name] = [int(x) for x in v]
    return env


def execute(program: Program, inputs: dict[str, Any], limit: StepLimit = StepLimit()) -> ExecutionTrace:
    """Run the program on concrete inputs, returning its execution trace.

    Raises RuntimeFault / StepLimitExceeded on failing runs; callers that
    build corpora treat those programs/inputs as excluded.
    """
    machine = _Machine(program, limit)
    machine.env = _validate_inputs(program, inputs)
    for name in program.variables:
        if name not in machine.env:
            machine.env[name] = BOTTOM

    trace = ExecutionTrace(initial_state=machine.snapshot(), inputs=dict(inputs))
    return_value = None
    try:
        machine.run_block(program.body)
    except _ReturnSignal as signal:
        return_value = signal.value
    trace.steps = machine.steps
    trace.covered = frozenset(machine.covered)
    trace.return_value = return_value
    return trace


def random_inputs(
    program: Program,
    n: int,
    seed: int,
    config: InputConfig = InputConfig(),
) -> list[dict[str, Any]]:
    """Draw n independent input bindings for the program's parameters."""
    if n <= 0:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        binding: dict[str, Any] = {}
        for name, t in program.params:
            if t == INT:
                binding[name] = int(rng.integers(config.int_low, config.int_high + 1))
            elif t == BOOL:
                binding[name] = bool(rng.integers(0, 2))
            else:
                length = int(rng.integers(config.array_min_len, config.array_max_len + 1))
                binding[name] = [
                    int(x) for x in rng.integers(config.int_low, config.int_high + 1, size=length)
                ]
        out.append(binding)
    return out


def branch_coverage(traces) -> frozenset[tuple[int, bool]]:
    """Union of (branch site, arm) pairs covered by the traces."""
    covered: set[tuple[int, bool]] = set()
    for trace in traces:
        covered |= trace.covered
    return frozenset(covered)


def observable_state(program: Program, trace: ExecutionTrace) -> tuple:
    """Return value plus final contents of array parameters (the oracle view)."""
    final = trace.steps[-1][1] if trace.steps else trace.initial_state
    arrays = tuple(
        final[program.variables.index(name)]
        for name, t in program.params
        if t == INT_ARRAY
    )
    return (trace.return_value, arrays)
