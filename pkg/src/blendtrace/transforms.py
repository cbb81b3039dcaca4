"""Semantics-preserving program transforms and the prediction-stability protocol.

Four rewrites (plus identity), each conservative: when a precondition can't
be established syntactically, the statement is left alone.

- const_prop: forward constant/copy propagation with literal folding
- dead_code:  liveness-based removal of unread scalar writes and dead stores
- unroll:     peel-and-guard loop unrolling (default factor 2)
- hoist:      loop-invariant code motion for fault-free pure assignments

Transformed ASTs are pretty-printed and re-parsed, so statement ids, tokens,
and branch sites are always rebuilt consistently.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .minilang import (
    ArrayLit,
    Assign,
    Binary,
    BoolLit,
    Call,
    Decl,
    Expr,
    For,
    If,
    INT,
    INT_ARRAY,
    IntLit,
    Index,
    Len,
    MinilangError,
    Program,
    Return,
    Stmt,
    StepLimit,
    Unary,
    Var,
    While,
    execute,
    observable_state,
    parse_program,
    program_str,
)
from .traces import BlendedTrace

TRANSFORM_KINDS = (
    "identity",
    "const_var_propagation",
    "dead_code_elim",
    "loop_unroll",
    "hoisting",
)

_INT_BOUND = 2**63


@dataclass(frozen=True)
class TransformResult:
    program: Program
    applied: bool


@dataclass(frozen=True)
class StabilityReport:
    kind: str
    total: int
    applicable: int
    changed: int

    @property
    def fraction(self) -> float:
        return self.changed / self.applicable if self.applicable else 0.0


# --- shared expression helpers ------------------------------------------------


def as_int_lit(e: Expr) -> int | None:
    if isinstance(e, IntLit):
        return e.value
    if isinstance(e, Unary) and e.op == "-" and isinstance(e.operand, IntLit):
        return -e.operand.value
    return None


def make_int_lit(v: int) -> Expr:
    return IntLit(v) if v >= 0 else Unary("-", IntLit(-v))


def as_bool_lit(e: Expr) -> bool | None:
    return e.value if isinstance(e, BoolLit) else None


def expr_reads(e: Expr, include_len: bool = True) -> set[str]:
    """Variable names an expression reads (Len counts unless disabled)."""
    if isinstance(e, (IntLit, BoolLit)):
        return set()
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Index):
        return {e.name} | expr_reads(e.index, include_len)
    if isinstance(e, Len):
        return {e.name} if include_len else set()
    if isinstance(e, ArrayLit):
        out: set[str] = set()
        for item in e.items:
            out |= expr_reads(item, include_len)
        return out
    if isinstance(e, Unary):
        return expr_reads(e.operand, include_len)
    if isinstance(e, Binary):
        return expr_reads(e.left, include_len) | expr_reads(e.right, include_len)
    raise TypeError(f"not an expression: {e!r}")


def assigned_scalars(body: Sequence[Stmt]) -> set[str]:
    """Scalar names written anywhere in the block (Decl/Assign/For vars)."""
    out: set[str] = set()
    for st in body:
        if isinstance(st, Decl):
            out.add(st.name)
        elif isinstance(st, Assign) and isinstance(st.target, Var):
            out.add(st.target.name)
        elif isinstance(st, If):
            out |= assigned_scalars(st.then_body) | assigned_scalars(st.else_body)
        elif isinstance(st, While):
            out |= assigned_scalars(st.body)
        elif isinstance(st, For):
            out |= {st.var} | assigned_scalars(st.body)
    return out


def mutated_arrays(body: Sequence[Stmt]) -> set[str]:
    out: set[str] = set()
    for st in body:
        if isinstance(st, Assign) and isinstance(st.target, Index):
            out.add(st.target.name)
        elif isinstance(st, Call):
            out.add(st.args[0].name)
        elif isinstance(st, If):
            out |= mutated_arrays(st.then_body) | mutated_arrays(st.else_body)
        elif isinstance(st, (While, For)):
            out |= mutated_arrays(st.body)
    return out


def declared_names(body: Sequence[Stmt]) -> set[str]:
    out: set[str] = set()
    for st in body:
        if isinstance(st, Decl):
            out.add(st.name)
        elif isinstance(st, If):
            out |= declared_names(st.then_body) | declared_names(st.else_body)
        elif isinstance(st, While):
            out |= declared_names(st.body)
        elif isinstance(st, For):
            out |= {st.var} | declared_names(st.body)
    return out


def _rebuild(program: Program, body: list[Stmt]) -> Program:
    return parse_program(program_str(program.name, program.params, body))


def _fresh_body(program: Program) -> list[Stmt]:
    return parse_program(program.text).body


# --- constant / copy propagation -----------------------------------------------

_Binding = tuple[str, object]  # ("const", value) | ("copy", root name)


def _fold(e: Expr) -> Expr:
    if isinstance(e, Unary):
        v = as_int_lit(e.operand)
        if e.op == "-" and v is not None:
            return make_int_lit(-v)
        b = as_bool_lit(e.operand)
        if e.op == "!" and b is not None:
            return BoolLit(not b)
        return e
    if not isinstance(e, Binary):
        return e
    li, ri = as_int_lit(e.left), as_int_lit(e.right)
    if li is not None and ri is not None:
        if e.op in ("+", "-", "*"):
            v = li + ri if e.op == "+" else li - ri if e.op == "-" else li * ri
            return make_int_lit(v) if -_INT_BOUND <= v < _INT_BOUND else e
        if e.op in ("/", "%"):
            if ri == 0:
                return e  # never fold a fault
            q = abs(li) // abs(ri)
            q = q if (li >= 0) == (ri >= 0) else -q
            return make_int_lit(q if e.op == "/" else li - ri * q)
        table = {
            "<": li < ri,
            "<=": li <= ri,
            ">": li > ri,
            ">=": li >= ri,
            "==": li == ri,
            "!=": li != ri,
        }
        if e.op in table:
            return BoolLit(table[e.op])
    lb, rb = as_bool_lit(e.left), as_bool_lit(e.right)
    if lb is not None and rb is not None:
        if e.op == "&&":
            return BoolLit(lb and rb)
        if e.op == "||":
            return BoolLit(lb or rb)
        if e.op == "==":
            return BoolLit(lb == rb)
        if e.op == "!=":
            return BoolLit(lb != rb)
    return e


class _Propagator:
    def __init__(self):
        self.hits = 0

    def subst(self, e: Expr, env: dict[str, _Binding]) -> Expr:
        if isinstance(e, (IntLit, BoolLit)):
            return e
        if isinstance(e, Var):
            binding = env.get(e.name)
            if binding is None:
                return e
            kind, payload = binding
            self.hits += 1
            if kind == "const":
                return BoolLit(payload) if isinstance(payload, bool) else make_int_lit(payload)
            return Var(payload)
        if isinstance(e, Index):
            return Index(e.name, self._sub_fold(e.index, env))
        if isinstance(e, Len):
            return e
        if isinstance(e, ArrayLit):
            return ArrayLit([self._sub_fold(item, env) for item in e.items])
        if isinstance(e, Unary):
            return Unary(e.op, self._sub_fold(e.operand, env))
        if isinstance(e, Binary):
            return Binary(e.op, self._sub_fold(e.left, env), self._sub_fold(e.right, env))
        raise TypeError(f"not an expression: {e!r}")

    def _sub_fold(self, e: Expr, env: dict[str, _Binding]) -> Expr:
        out = self.subst(e, env)
        folded = _fold(out)
        if folded is not out:
            self.hits += 1
        return folded

    # -- statement walk ----------------------------------------------------

    @staticmethod
    def _invalidate(env: dict[str, _Binding], name: str) -> None:
        env.pop(name, None)
        for key in [k for k, (kind, payload) in env.items() if kind == "copy" and payload == name]:
            env.pop(key)

    @staticmethod
    def _binding_of(value: Expr) -> _Binding | None:
        iv = as_int_lit(value)
        if iv is not None:
            return ("const", iv)
        bv = as_bool_lit(value)
        if bv is not None:
            return ("const", bv)
        if isinstance(value, Var):
            return ("copy", value.name)
        return None

    @staticmethod
    def _kill_loop_vars(env: dict[str, _Binding], killed: set[str]) -> None:
        for name in list(env):
            kind, payload = env[name]
            if name in killed or (kind == "copy" and payload in killed):
                env.pop(name, None)

    def walk(self, body: list[Stmt], env: dict[str, _Binding]) -> None:
        for st in body:
            if isinstance(st, Decl):
                if st.init is not None:
                    st.init = self._sub_fold(st.init, env)
                    if not isinstance(st.init, ArrayLit):
                        binding = self._binding_of(st.init)
                        if binding is not None:
                            env[st.name] = binding
                continue
            if isinstance(st, Assign):
                st.value = self._sub_fold(st.value, env)
                if isinstance(st.target, Index):
                    st.target = Index(st.target.name, self._sub_fold(st.target.index, env))
                    continue
                name = st.target.name
                if st.op == "=":
                    self._invalidate(env, name)
                    binding = self._binding_of(st.value)
                    if binding is not None and binding != ("copy", name):
                        env[name] = binding
                else:
                    old = env.get(name)
                    value_lit = as_int_lit(st.value)
                    if (
                        old is not None
                        and old[0] == "const"
                        and not isinstance(old[1], bool)
                        and value_lit is not None
                    ):
                        folded = _fold(Binary(st.op[0], make_int_lit(old[1]), st.value))
                        new_lit = as_int_lit(folded)
                        if new_lit is not None:
                            st.op = "="
                            st.value = make_int_lit(new_lit)
                            self._invalidate(env, name)
                            env[name] = ("const", new_lit)
                            self.hits += 1
                            continue
                    self._invalidate(env, name)
                continue
            if isinstance(st, If):
                st.cond = self._sub_fold(st.cond, env)
                env_then = dict(env)
                env_else = dict(env)
                self.walk(st.then_body, env_then)
                self.walk(st.else_body, env_else)
                env.clear()
                env.update(
                    {
                        k: env_then[k]
                        for k in env_then
                        if k in env_else and env_else[k] == env_then[k]
                    }
                )
                continue
            if isinstance(st, While):
                killed = assigned_scalars(st.body)
                self._kill_loop_vars(env, killed)
                st.cond = self._sub_fold(st.cond, env)
                self.walk(st.body, dict(env))
                continue
            if isinstance(st, For):
                st.lo = self._sub_fold(st.lo, env)  # evaluated once, at entry
                killed = assigned_scalars(st.body) | {st.var}
                self._kill_loop_vars(env, killed)
                st.hi = self._sub_fold(st.hi, env)  # re-evaluated every check
                self.walk(st.body, dict(env))
                continue
            if isinstance(st, Return):
                if st.value is not None:
                    st.value = self._sub_fold(st.value, env)
                continue
            if isinstance(st, Call):
                st.args = [st.args[0]] + [self._sub_fold(a, env) for a in st.args[1:]]
                continue
            raise TypeError(f"not a statement: {st!r}")


def const_prop(program: Program) -> TransformResult:
    body = _fresh_body(program)
    prop = _Propagator()
    prop.walk(body, {})
    if prop.hits == 0:
        return TransformResult(program, False)
    rebuilt = _rebuild(program, body)
    return TransformResult(rebuilt, rebuilt.tokens != program.tokens)


# --- dead code elimination -------------------------------------------------------


class _Eliminator:
    def __init__(self, param_arrays: frozenset[str]):
        self.param_arrays = param_arrays
        self.changed = False

    def sweep(self, body: list[Stmt], live_out: set[str], remove: bool) -> tuple[list[Stmt], set[str]]:
        """Backward liveness over a block; optionally drops dead statements."""
        live = set(live_out)
        kept_reversed: list[Stmt] = []
        for st in reversed(body):
            keep = True
            if isinstance(st, Return):
                if st.value is not None:
                    live |= expr_reads(st.value)
                live |= self.param_arrays
            elif isinstance(st, Decl):
                if st.name not in live and st.name not in self.param_arrays:
                    if st.init is not None:
                        if remove:
                            st.init = None  # keep the declaration, drop the computation
                            self.changed = True
                        # the dropped initializer's reads vanish with it
                else:
                    live.discard(st.name)
                    if st.init is not None:
                        live |= expr_reads(st.init)
            elif isinstance(st, Assign):
                if isinstance(st.target, Index):
                    name = st.target.name
                    if name not in live and name not in self.param_arrays:
                        keep = False
                    else:
                        live |= {name} | expr_reads(st.target.index) | expr_reads(st.value)
                else:
                    name = st.target.name
                    if name not in live:
                        keep = False
                    else:
                        if st.op == "=":
                            live.discard(name)
                        live |= expr_reads(st.value)
            elif isinstance(st, Call):
                name = st.args[0].name
                if name not in live and name not in self.param_arrays:
                    keep = False
                else:
                    live |= {name}
                    for arg in st.args[1:]:
                        live |= expr_reads(arg)
            elif isinstance(st, If):
                then_body, live_then = self.sweep(st.then_body, set(live), remove)
                else_body, live_else = self.sweep(st.else_body, set(live), remove)
                if remove:
                    st.then_body = then_body
                    st.else_body = else_body
                if remove and not then_body and not else_body:
                    keep = False  # guard is pure; an empty if does nothing
                else:
                    live = live_then | live_else | expr_reads(st.cond)
            elif isinstance(st, While):
                loop_live = self._loop_fixpoint(st.body, live | expr_reads(st.cond))
                new_body, _ = self.sweep(st.body, set(loop_live), remove)
                if remove:
                    st.body = new_body
                live = loop_live  # empty whiles stay: they may not terminate
            elif isinstance(st, For):
                header = expr_reads(st.lo) | expr_reads(st.hi)
                loop_live = self._loop_fixpoint(st.body, live | header | {st.var})
                new_body, _ = self.sweep(st.body, set(loop_live), remove)
                if remove:
                    st.body = new_body
                if (
                    remove
                    and not new_body
                    and st.var not in live
                    and st.var not in expr_reads(st.hi)
                ):
                    keep = False  # empty for with an unread, bound-independent var terminates
                else:
                    live = (loop_live | header) - {st.var}
            else:
                raise TypeError(f"not a statement: {st!r}")

            if keep:
                kept_reversed.append(st)
            elif remove:
                self.changed = True
        return list(reversed(kept_reversed)), live

    def _loop_fixpoint(self, body: list[Stmt], live_out: set[str]) -> set[str]:
        live = set(live_out)
        while True:
            _, live_in = self.sweep(body, set(live), remove=False)
            merged = live | live_in
            if merged == live:
                return live
            live = merged


def _referenced_names(body: Sequence[Stmt]) -> set[str]:
    """Every name appearing outside its own bare declaration."""
    out: set[str] = set()

    def visit_expr(e: Expr) -> None:
        out.update(expr_reads(e))

    def visit(block: Sequence[Stmt]) -> None:
        for st in block:
            if isinstance(st, Decl):
                if st.init is not None:
                    out.add(st.name)
                    visit_expr(st.init)
            elif isinstance(st, Assign):
                if isinstance(st.target, Index):
                    out.add(st.target.name)
                    visit_expr(st.target.index)
                else:
                    out.add(st.target.name)
                visit_expr(st.value)
            elif isinstance(st, If):
                visit_expr(st.cond)
                visit(st.then_body)
                visit(st.else_body)
            elif isinstance(st, While):
                visit_expr(st.cond)
                visit(st.body)
            elif isinstance(st, For):
                out.add(st.var)
                visit_expr(st.lo)
                visit_expr(st.hi)
                visit(st.body)
            elif isinstance(st, Return):
                if st.value is not None:
                    visit_expr(st.value)
            elif isinstance(st, Call):
                for arg in st.args:
                    visit_expr(arg)

    visit(body)
    return out


def _drop_unreferenced_decls(body: list[Stmt]) -> bool:
    referenced = _referenced_names(body)
    changed = False

    def prune(block: list[Stmt]) -> list[Stmt]:
        nonlocal changed
        kept = []
        for st in block:
            if isinstance(st, Decl) and st.init is None and st.name not in referenced:
                changed = True
                continue
            if isinstance(st, If):
                st.then_body = prune(st.then_body)
                st.else_body = prune(st.else_body)
            elif isinstance(st, (While, For)):
                st.body = prune(st.body)
            kept.append(st)
        return kept

    body[:] = prune(body)
    return changed


def dead_code(program: Program) -> TransformResult:
    body = _fresh_body(program)
    param_arrays = frozenset(n for n, t in program.params if t == "int[]")
    elim = _Eliminator(param_arrays)
    body, _ = elim.sweep(body, set(param_arrays), remove=True)
    dropped = _drop_unreferenced_decls(body)
    if not (elim.changed or dropped):
        return TransformResult(program, False)
    rebuilt = _rebuild(program, body)
    return TransformResult(rebuilt, rebuilt.tokens != program.tokens)


# --- loop unrolling ---------------------------------------------------------------


def _decls_to_assigns(block: list[Stmt]) -> list[Stmt]:
    """Duplicated loop bodies may not re-declare: turn decls into assignments.

    A decl-with-init executes as an assignment anyway, so this preserves
    per-iteration behavior exactly; bare decls execute as no-ops and vanish.
    """
    out: list[Stmt] = []
    for st in block:
        if isinstance(st, Decl):
            if st.init is not None:
                out.append(Assign(Var(st.name), "=", st.init))
            continue
        if isinstance(st, If):
            st.then_body = _decls_to_assigns(st.then_body)
            st.else_body = _decls_to_assigns(st.else_body)
        elif isinstance(st, (While, For)):
            st.body = _decls_to_assigns(st.body)
        out.append(st)
    return out


def _declares_array(block: Sequence[Stmt]) -> bool:
    for st in block:
        if isinstance(st, Decl) and st.type == INT_ARRAY:
            return True
        if isinstance(st, If) and (_declares_array(st.then_body) or _declares_array(st.else_body)):
            return True
        if isinstance(st, (While, For)) and _declares_array(st.body):
            return True
    return False


def _unrolled_while_body(cond: Expr, body: list[Stmt], tail: list[Stmt], factor: int) -> list[Stmt]:
    """body+tail, then factor-1 guarded copies: B; if (cond) { B; if ... }."""
    block: list[Stmt] = []
    for _ in range(factor - 1):
        copy_body = _decls_to_assigns(
            [copy.deepcopy(s) for s in body] + [copy.deepcopy(s) for s in tail]
        )
        block = [If(copy.deepcopy(cond), copy_body + block, [])]
    return [copy.deepcopy(s) for s in body] + [copy.deepcopy(s) for s in tail] + block


def _unroll_block(body: list[Stmt], factor: int) -> tuple[list[Stmt], bool]:
    changed = False
    out: list[Stmt] = []
    for st in body:
        if isinstance(st, If):
            st.then_body, c1 = _unroll_block(st.then_body, factor)
            st.else_body, c2 = _unroll_block(st.else_body, factor)
            changed |= c1 or c2
            out.append(st)
            continue
        if isinstance(st, While):
            inner, inner_changed = _unroll_block(st.body, factor)
            st.body = inner
            if _declares_array(inner):  # array decls can't become assignments
                changed |= inner_changed
                out.append(st)
                continue
            st.body = _unrolled_while_body(st.cond, inner, [], factor)
            out.append(st)
            changed = True
            continue
        if isinstance(st, For):
            inner, inner_changed = _unroll_block(st.body, factor)
            if _declares_array(inner):
                st.body = inner
                changed |= inner_changed
                out.append(st)
                continue
            cond = Binary("<", Var(st.var), st.hi)
            step: list[Stmt] = [Assign(Var(st.var), "+=", IntLit(1))]
            out.append(Decl(st.var, INT, st.lo))
            out.append(While(copy.deepcopy(cond), _unrolled_while_body(cond, inner, step, factor)))
            changed = True
            continue
        out.append(st)
    return out, changed


def unroll(program: Program, factor: int = 2) -> TransformResult:
    if factor < 1:
        raise ValueError("unroll factor must be at least 1")
    if factor == 1:
        return TransformResult(program, False)  # factor-1 unrolling is the loop itself
    body, changed = _unroll_block(_fresh_body(program), factor)
    if not changed:
        return TransformResult(program, False)
    return TransformResult(_rebuild(program, body), True)


# --- loop-invariant hoisting --------------------------------------------------------


def _write_counts(body: Sequence[Stmt], counts: dict[str, int]) -> None:
    for st in body:
        if isinstance(st, Decl):
            counts[st.name] = counts.get(st.name, 0) + 1
        elif isinstance(st, Assign) and isinstance(st.target, Var):
            counts[st.target.name] = counts.get(st.target.name, 0) + 1
        elif isinstance(st, If):
            _write_counts(st.then_body, counts)
            _write_counts(st.else_body, counts)
        elif isinstance(st, While):
            _write_counts(st.body, counts)
        elif isinstance(st, For):
            counts[st.var] = counts.get(st.var, 0) + 1
            _write_counts(st.body, counts)


def _reads_in_block(body: Sequence[Stmt], name: str) -> int:
    """Occurrences of ``name`` being read (expressions only) in the block."""
    count = 0

    def visit_expr(e: Expr) -> None:
        nonlocal count
        if isinstance(e, Var):
            count += e.name == name
        elif isinstance(e, Index):
            count += e.name == name
            visit_expr(e.index)
        elif isinstance(e, Len):
            count += e.name == name
        elif isinstance(e, ArrayLit):
            for item in e.items:
                visit_expr(item)
        elif isinstance(e, Unary):
            visit_expr(e.operand)
        elif isinstance(e, Binary):
            visit_expr(e.left)
            visit_expr(e.right)

    def _bump() -> None:
        nonlocal count
        count += 1

    def visit(block: Sequence[Stmt]) -> None:
        for st in block:
            if isinstance(st, Decl):
                if st.init is not None:
                    visit_expr(st.init)
            elif isinstance(st, Assign):
                if isinstance(st.target, Index):
                    if st.target.name == name:
                        _bump()  # an array store reads the array binding
                    visit_expr(st.target.index)
                elif st.op != "=" and st.target.name == name:
                    _bump()  # compound assign reads the target
                visit_expr(st.value)
            elif isinstance(st, If):
                visit_expr(st.cond)
                visit(st.then_body)
                visit(st.else_body)
            elif isinstance(st, While):
                visit_expr(st.cond)
                visit(st.body)
            elif isinstance(st, For):
                visit_expr(st.lo)
                visit_expr(st.hi)
                visit(st.body)
            elif isinstance(st, Return):
                if st.value is not None:
                    visit_expr(st.value)
            elif isinstance(st, Call):
                if st.args[0].name == name:
                    _bump()
                visit_expr(st.args[1])
                visit_expr(st.args[2])

    visit(body)
    return count


def _fault_free(e: Expr) -> bool:
    """Pure AND cannot fault when its reads are defined: no div/mod, no indexing."""
    if isinstance(e, (IntLit, BoolLit, Var, Len)):
        return True
    if isinstance(e, Index):
        return False  # bounds unknown
    if isinstance(e, ArrayLit):
        return all(_fault_free(item) for item in e.items)
    if isinstance(e, Unary):
        return _fault_free(e.operand)
    if isinstance(e, Binary):
        if e.op in ("/", "%"):
            return False  # divisor value unknown
        return _fault_free(e.left) and _fault_free(e.right)
    return False


def _definitely_assigned_before(root: Sequence[Stmt], target_loop: Stmt, params: set[str]) -> set[str]:
    """Names certainly bound before the loop starts: params plus top-level
    straight-line writes on the unique path to the loop."""
    assigned = set(params)

    def walk(block: Sequence[Stmt]) -> bool:
        for st in block:
            if st is target_loop:
                return True
            if isinstance(st, Decl):
                if st.init is not None:
                    assigned.add(st.name)
            elif isinstance(st, Assign) and isinstance(st.target, Var):
                assigned.add(st.target.name)
            elif isinstance(st, If):
                before = set(assigned)
                if walk(st.then_body) or walk(st.else_body):
                    return True
                assigned.clear()
                assigned.update(before)  # branch writes are not definite
            elif isinstance(st, While):
                if walk(st.body):
                    return True
            elif isinstance(st, For):
                if walk(st.body):
                    return True
                assigned.add(st.var)  # a completed for leaves its var bound
        return False

    walk(root)
    return assigned


def _hoist_from_loop(loop: While | For, root_body: list[Stmt], params: set[str]) -> list[Stmt]:
    """Pull invariant top-level assignments out of one loop (fixpoint)."""
    moved: list[Stmt] = []
    while True:
        body = loop.body
        writes: dict[str, int] = {}
        _write_counts(body, writes)
        invariant_blockers = assigned_scalars(body) | mutated_arrays(body)
        declared_inside = declared_names(body)
        if isinstance(loop, For):
            invariant_blockers.add(loop.var)
            declared_inside.add(loop.var)
        definite = _definitely_assigned_before(root_body, loop, params)

        candidate = None
        for pos, st in enumerate(body):
            if isinstance(st, Decl) and st.init is not None and not isinstance(st.init, ArrayLit):
                name, rhs = st.name, st.init
            elif isinstance(st, Assign) and isinstance(st.target, Var) and st.op == "=":
                name, rhs = st.target.name, st.value
            else:
                continue
            if writes.get(name, 0) != 1:
                continue
            if not _fault_free(rhs):
                continue
            value_reads = expr_reads(rhs, include_len=False)
            len_reads = expr_reads(rhs) - value_reads
            if value_reads & invariant_blockers:
                continue
            if len_reads & declared_inside:  # len() of an array born inside the loop
                continue
            if not (expr_reads(rhs) <= definite):
                continue
            before = body[:pos]
            if _reads_in_block(before, name):
                continue  # read earlier in the iteration: not movable
            outside_reads = _reads_in_block(root_body, name) - _reads_in_block([loop], name)
            if outside_reads:
                continue  # value after a zero-trip loop would become observable
            candidate = (pos, st)
            break

        if candidate is None:
            return moved
        pos, st = candidate
        del loop.body[pos]
        moved.append(st)
        # Insert just before the loop so later candidates can depend on it.
        _insert_before(root_body, loop, st)


def _insert_before(block: list[Stmt], target: Stmt, new_stmt: Stmt) -> bool:
    for i, st in enumerate(block):
        if st is target:
            block.insert(i, new_stmt)
            return True
        if isinstance(st, If):
            if _insert_before(st.then_body, target, new_stmt) or _insert_before(
                st.else_body, target, new_stmt
            ):
                return True
        elif isinstance(st, (While, For)):
            if _insert_before(st.body, target, new_stmt):
                return True
    return False


def hoist(program: Program) -> TransformResult:
    body = _fresh_body(program)
    params = {n for n, _ in program.params}
    changed = False

    def visit(block: list[Stmt]) -> None:
        nonlocal changed
        for st in list(block):
            if isinstance(st, If):
                visit(st.then_body)
                visit(st.else_body)
            elif isinstance(st, (While, For)):
                visit(st.body)  # inner loops first; their hoists may cascade outward
                if _hoist_from_loop(st, body, params):
                    changed = True

    visit(body)
    if not changed:
        return TransformResult(program, False)
    return TransformResult(_rebuild(program, body), True)


# --- dispatcher ------------------------------------------------------------------


def apply_transform(program: Program, kind: str, factor: int = 2) -> TransformResult:
    if kind == "identity":
        return TransformResult(program, True)
    if kind == "const_var_propagation":
        return const_prop(program)
    if kind == "dead_code_elim":
        return dead_code(program)
    if kind == "loop_unroll":
        return unroll(program, factor)
    if kind == "hoisting":
        return hoist(program)
    raise ValueError(f"unknown transform kind {kind!r} (expected one of {TRANSFORM_KINDS})")


# --- equivalence oracle -------------------------------------------------------------


def check_equivalence(
    p: Program,
    q: Program,
    inputs: Iterable[dict],
    limit: StepLimit = StepLimit(),
) -> bool:
    """True iff both programs terminate cleanly on every input with equal
    observable state (return value + final parameter arrays)."""
    if p.params != q.params:
        return False
    for binding in inputs:
        try:
            tp = execute(p, binding, limit)
            tq = execute(q, binding, limit)
        except MinilangError:
            return False
        if observable_state(p, tp) != observable_state(q, tq):
            return False
    return True


# --- stability protocol ---------------------------------------------------------------


def measure_stability(
    predict: Callable[[Program, list[BlendedTrace]], int],
    programs: Sequence[tuple[str, Program]],
    kind: str,
    tracer: Callable[[str, Program], list[BlendedTrace]],
    factor: int = 2,
) -> StabilityReport:
    """Fraction of applicable programs whose predicted label changes under the
    transform.  A program counts toward the denominator only if the transform
    actually changed it AND the original yields usable traces (a base
    prediction exists).  A transformed program that yields no usable traces
    counts as changed.
    """
    applicable = 0
    changed = 0
    total = 0
    for program_id, program in programs:
        total += 1
        result = apply_transform(program, kind, factor)
        if not result.applied:
            continue
        base_traces = tracer(program_id, program)
        if not base_traces:
            continue
        applicable += 1
        base = predict(program, base_traces)
        new_traces = tracer(program_id, result.program)
        if not new_traces:
            changed += 1
            continue
        new = predict(result.program, new_traces)
        if new != base:
            changed += 1
    return StabilityReport(kind=kind, total=total, applicable=applicable, changed=changed)
