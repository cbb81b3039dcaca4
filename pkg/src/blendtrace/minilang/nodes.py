"""AST node types, canonical pretty-printing, and per-statement token streams.

The language is deliberately tiny: 64-bit ints, bools, fixed-max-length int
arrays; assignment (plain and compound), arithmetic, comparisons, logical
ops, `if`/`else`, `while`, bounded `for`, `return`, and a built-in
`swap(a, i, j)` statement call.  One top-level function per program.

Statement ids are assigned in stable pre-order by the parser's finalize pass;
a statement's token sequence is its canonical surface form without statement
punctuation (guards contribute just their condition expression).
"""
from __future__ import annotations

from dataclasses import dataclass, field

MAX_ARRAY_LEN = 16

INT = "int"
BOOL = "bool"
INT_ARRAY = "int[]"


# --- expressions ------------------------------------------------------------


@dataclass
class IntLit:
    value: int  # always non-negative; negatives are Unary("-", ...)


@dataclass
class BoolLit:
    value: bool


@dataclass
class Var:
    name: str


@dataclass
class Index:
    name: str
    index: "Expr"


@dataclass
class Len:
    name: str


@dataclass
class ArrayLit:
    items: list["Expr"]


@dataclass
class Unary:
    op: str  # "-" | "!"
    operand: "Expr"


@dataclass
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


Expr = IntLit | BoolLit | Var | Index | Len | ArrayLit | Unary | Binary


# --- statements -------------------------------------------------------------


@dataclass
class Decl:
    name: str
    type: str
    init: Expr | None
    sid: int = -1
    tokens: tuple[str, ...] = ()


@dataclass
class Assign:
    target: Var | Index
    op: str  # "=", "+=", "-=", "*=", "/=", "%="
    value: Expr
    sid: int = -1
    tokens: tuple[str, ...] = ()


@dataclass
class If:
    cond: Expr
    then_body: list["Stmt"]
    else_body: list["Stmt"]
    sid: int = -1
    tokens: tuple[str, ...] = ()


@dataclass
class While:
    cond: Expr
    body: list["Stmt"]
    sid: int = -1
    tokens: tuple[str, ...] = ()


@dataclass
class For:
    var: str
    lo: Expr
    hi: Expr
    body: list["Stmt"]
    sid: int = -1
    tokens: tuple[str, ...] = ()


@dataclass
class Return:
    value: Expr | None
    sid: int = -1
    tokens: tuple[str, ...] = ()


@dataclass
class Call:
    func: str  # only "swap"
    args: list[Expr]
    sid: int = -1
    tokens: tuple[str, ...] = ()


Stmt = Decl | Assign | If | While | For | Return | Call

GUARD_KINDS = (If, While, For)


def stmt_kind(st: Stmt) -> str:
    if isinstance(st, (Decl, Assign)):
        return "array-store" if isinstance(st, Assign) and isinstance(st.target, Index) else "assign"
    if isinstance(st, If):
        return "if-guard"
    if isinstance(st, While):
        return "while-guard"
    if isinstance(st, For):
        return "for-guard"
    if isinstance(st, Return):
        return "return"
    if isinstance(st, Call):
        return "call"
    raise TypeError(f"not a statement: {st!r}")


# --- program ----------------------------------------------------------------


@dataclass
class Program:
    name: str
    params: tuple[tuple[str, str], ...]  # (name, type), declaration order
    body: list[Stmt]
    statements: list[Stmt] = field(default_factory=list)  # indexed by sid
    variables: tuple[str, ...] = ()  # params first, then locals, declaration order
    var_types: dict[str, str] = field(default_factory=dict)
    branch_sites: tuple[int, ...] = ()  # guard statement ids, pre-order
    text: str = ""
    tokens: tuple[str, ...] = ()

    def all_branches(self) -> frozenset[tuple[int, bool]]:
        return frozenset((site, arm) for site in self.branch_sites for arm in (True, False))


# --- pretty printing --------------------------------------------------------

_PREC = {
    "||": 1,
    "&&": 2,
    "==": 3,
    "!=": 3,
    "<": 3,
    "<=": 3,
    ">": 3,
    ">=": 3,
    "+": 4,
    "-": 4,
    "*": 5,
    "/": 5,
    "%": 5,
}
_UNARY_PREC = 6


def expr_str(e: Expr, parent_prec: int = 0, right_side: bool = False) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Index):
        return f"{e.name}[{expr_str(e.index)}]"
    if isinstance(e, Len):
        return f"len({e.name})"
    if isinstance(e, ArrayLit):
        return "[" + ", ".join(expr_str(item) for item in e.items) + "]"
    if isinstance(e, Unary):
        inner = expr_str(e.operand, _UNARY_PREC)
        text = f"{e.op}{inner}" if e.op == "-" else f"{e.op}{inner}"
        return f"({text})" if parent_prec > _UNARY_PREC else text
    if isinstance(e, Binary):
        prec = _PREC[e.op]
        left = expr_str(e.left, prec, False)
        right = expr_str(e.right, prec + 1, True)  # left-associative
        text = f"{left} {e.op} {right}"
        needs = prec < parent_prec or (prec == parent_prec and right_side)
        return f"({text})" if needs else text
    raise TypeError(f"not an expression: {e!r}")


def _stmt_lines(st: Stmt, indent: int) -> list[str]:
    pad = "  " * indent
    if isinstance(st, Decl):
        if st.init is None:
            return [f"{pad}{st.name}: {st.type};"]
        return [f"{pad}{st.name}: {st.type} = {expr_str(st.init)};"]
    if isinstance(st, Assign):
        return [f"{pad}{expr_str(st.target)} {st.op} {expr_str(st.value)};"]
    if isinstance(st, If):
        lines = [f"{pad}if ({expr_str(st.cond)}) {{"]
        for child in st.then_body:
            lines.extend(_stmt_lines(child, indent + 1))
        if st.else_body:
            lines.append(f"{pad}}} else {{")
            for child in st.else_body:
                lines.extend(_stmt_lines(child, indent + 1))
        lines.append(f"{pad}}}")
        return lines
    if isinstance(st, While):
        lines = [f"{pad}while ({expr_str(st.cond)}) {{"]
        for child in st.body:
            lines.extend(_stmt_lines(child, indent + 1))
        lines.append(f"{pad}}}")
        return lines
    if isinstance(st, For):
        lines = [f"{pad}for {st.var} in {expr_str(st.lo)} .. {expr_str(st.hi)} {{"]
        for child in st.body:
            lines.extend(_stmt_lines(child, indent + 1))
        lines.append(f"{pad}}}")
        return lines
    if isinstance(st, Return):
        if st.value is None:
            return [f"{pad}return;"]
        return [f"{pad}return {expr_str(st.value)};"]
    if isinstance(st, Call):
        args = ", ".join(expr_str(a) for a in st.args)
        return [f"{pad}{st.func}({args});"]
    raise TypeError(f"not a statement: {st!r}")


def program_str(name: str, params, body: list[Stmt]) -> str:
    sig = ", ".join(f"{n}: {t}" for n, t in params)
    lines = [f"fn {name}({sig}) {{"]
    for st in body:
        lines.extend(_stmt_lines(st, 1))
    lines.append("}")
    return "\n".join(lines) + "\n"
