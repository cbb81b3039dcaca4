"""Lexer, recursive-descent parser, and the finalize pass.

Finalize assigns stable pre-order statement ids, records declaration-order
variables, collects branch sites (guard statements), runs name/type checks,
fixes each statement's canonical token sequence, and re-tokenizes the pretty
printed source as the program's token stream (so tokens round-trip).
"""
from __future__ import annotations

from dataclasses import dataclass

from .nodes import (
    BOOL,
    GUARD_KINDS,
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
    expr_str,
    program_str,
)


class MinilangError(Exception):
    """Base for everything the language front end or runtime can raise."""


class ParseError(MinilangError):
    pass


KEYWORDS = {
    "fn",
    "if",
    "else",
    "while",
    "for",
    "in",
    "return",
    "true",
    "false",
    "int",
    "bool",
    "len",
    "swap",
}

_TWO_CHAR = ("..", "==", "!=", "<=", ">=", "&&", "||", "+=", "-=", "*=", "/=", "%=")
_ONE_CHAR = set("(){}[],;:=<>!+-*/%")


@dataclass(frozen=True)
class Token:
    kind: str  # "int" | "ident" | "kw" | "sym" | "eof"
    text: str
    line: int


def tokenize(src: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    line = 1
    n = len(src)
    while i < n:
        ch = src[i]
        if ch == "\n":
            line += 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            continue
        if ch == "#":  # comment to end of line
            while i < n and src[i] != "\n":
                i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and src[j].isdigit():
                j += 1
            tokens.append(Token("int", src[i:j], line))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            word = src[i:j]
            tokens.append(Token("kw" if word in KEYWORDS else "ident", word, line))
            i = j
            continue
        if src[i : i + 2] in _TWO_CHAR:
            tokens.append(Token("sym", src[i : i + 2], line))
            i += 2
            continue
        if ch in _ONE_CHAR:
            tokens.append(Token("sym", ch, line))
            i += 1
            continue
        raise ParseError(f"line {line}: unexpected character {ch!r}")
    tokens.append(Token("eof", "", line))
    return tokens


def token_strings(src: str) -> tuple[str, ...]:
    return tuple(t.text for t in tokenize(src) if t.kind != "eof")


class _Parser:
    def __init__(self, src: str):
        self.tokens = tokenize(src)
        self.pos = 0

    # -- plumbing ---------------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def at(self, text: str) -> bool:
        return self.peek().text == text and self.peek().kind in ("sym", "kw")

    def eat(self, text: str) -> bool:
        if self.at(text):
            self.advance()
            return True
        return False

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok.text != text or tok.kind not in ("sym", "kw"):
            raise ParseError(f"line {tok.line}: expected {text!r}, found {tok.text!r}")
        return self.advance()

    def expect_ident(self) -> str:
        tok = self.peek()
        if tok.kind != "ident":
            raise ParseError(f"line {tok.line}: expected identifier, found {tok.text!r}")
        return self.advance().text

    # -- grammar ------------------------------------------------------------

    def parse_program(self) -> Program:
        self.expect("fn")
        name = self.expect_ident()
        self.expect("(")
        params: list[tuple[str, str]] = []
        if not self.at(")"):
            while True:
                pname = self.expect_ident()
                self.expect(":")
                params.append((pname, self.parse_type()))
                if not self.eat(","):
                    break
        self.expect(")")
        body = self.parse_block()
        tok = self.peek()
        if tok.kind != "eof":
            raise ParseError(f"line {tok.line}: trailing input after function body")
        return finalize(name, tuple(params), body)

    def parse_type(self) -> str:
        tok = self.peek()
        if self.eat("int"):
            if self.eat("["):
                self.expect("]")
                return INT_ARRAY
            return INT
        if self.eat("bool"):
            return BOOL
        raise ParseError(f"line {tok.line}: expected a type, found {tok.text!r}")

    def parse_block(self) -> list[Stmt]:
        self.expect("{")
        body: list[Stmt] = []
        while not self.at("}"):
            body.append(self.parse_stmt())
        self.expect("}")
        return body

    def parse_stmt(self) -> Stmt:
        tok = self.peek()
        if self.eat("if"):
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            then_body = self.parse_block()
            else_body: list[Stmt] = []
            if self.eat("else"):
                if self.at("if"):  # `else if` chains nest as a one-statement block
                    else_body = [self.parse_stmt()]
                else:
                    else_body = self.parse_block()
            return If(cond, then_body, else_body)
        if self.eat("while"):
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            return While(cond, self.parse_block())
        if self.eat("for"):
            var = self.expect_ident()
            self.expect("in")
            lo = self.parse_expr()
            self.expect("..")
            hi = self.parse_expr()
            return For(var, lo, hi, self.parse_block())
        if self.eat("return"):
            if self.eat(";"):
                return Return(None)
            value = self.parse_expr()
            self.expect(";")
            return Return(value)
        if self.eat("swap"):
            self.expect("(")
            args = [self.parse_expr()]
            while self.eat(","):
                args.append(self.parse_expr())
            self.expect(")")
            self.expect(";")
            return Call("swap", args)
        if tok.kind == "ident":
            name = self.advance().text
            if self.eat(":"):  # declaration
                var_type = self.parse_type()
                init: Expr | None = None
                if self.eat("="):
                    init = self.parse_array_lit() if self.at("[") else self.parse_expr()
                self.expect(";")
                return Decl(name, var_type, init)
            target: Var | Index
            if self.eat("["):
                idx = self.parse_expr()
                self.expect("]")
                target = Index(name, idx)
            else:
                target = Var(name)
            op_tok = self.peek()
            if op_tok.text not in ("=", "+=", "-=", "*=", "/=", "%="):
                raise ParseError(f"line {op_tok.line}: expected assignment operator, found {op_tok.text!r}")
            self.advance()
            value = self.parse_expr()
            self.expect(";")
            return Assign(target, op_tok.text, value)
        raise ParseError(f"line {tok.line}: expected a statement, found {tok.text!r}")

    def parse_array_lit(self) -> ArrayLit:
        self.expect("[")
        items: list[Expr] = []
        if not self.at("]"):
            while True:
                items.append(self.parse_expr())
                if not self.eat(","):
                    break
        tok = self.expect("]")
        if len(items) > MAX_ARRAY_LEN:
            raise ParseError(f"line {tok.line}: array literal longer than {MAX_ARRAY_LEN}")
        return ArrayLit(items)

    # precedence climbing
    def parse_expr(self) -> Expr:
        return self.parse_or()

    def parse_or(self) -> Expr:
        left = self.parse_and()
        while self.at("||"):
            self.advance()
            left = Binary("||", left, self.parse_and())
        return left

    def parse_and(self) -> Expr:
        left = self.parse_cmp()
        while self.at("&&"):
            self.advance()
            left = Binary("&&", left, self.parse_cmp())
        return left

    def parse_cmp(self) -> Expr:
        left = self.parse_add()
        while self.peek().text in ("==", "!=", "<", "<=", ">", ">=") and self.peek().kind == "sym":
            op = self.advance().text
            left = Binary(op, left, self.parse_add())
        return left

    def parse_add(self) -> Expr:
        left = self.parse_mul()
        while self.peek().kind == "sym" and self.peek().text in ("+", "-"):
            op = self.advance().text
            left = Binary(op, left, self.parse_mul())
        return left

    def parse_mul(self) -> Expr:
        left = self.parse_unary()
        while self.peek().kind == "sym" and self.peek().text in ("*", "/", "%"):
            op = self.advance().text
            left = Binary(op, left, self.parse_unary())
        return left

    def parse_unary(self) -> Expr:
        if self.eat("-"):
            return Unary("-", self.parse_unary())
        if self.eat("!"):
            return Unary("!", self.parse_unary())
        return self.parse_primary()

    def parse_primary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "int":
            self.advance()
            return IntLit(int(tok.text))
        if self.eat("true"):
            return BoolLit(True)
        if self.eat("false"):
            return BoolLit(False)
        if self.eat("len"):
            self.expect("(")
            name = self.expect_ident()
            self.expect(")")
            return Len(name)
        if self.eat("("):
            inner = self.parse_expr()
            self.expect(")")
            return inner
        if tok.kind == "ident":
            name = self.advance().text
            if self.eat("["):
                idx = self.parse_expr()
                self.expect("]")
                return Index(name, idx)
            return Var(name)
        raise ParseError(f"line {tok.line}: expected an expression, found {tok.text!r}")


# --- finalize: ids, tokens, checks ------------------------------------------


def _type_tokens(t: str) -> list[str]:
    return ["int", "[", "]"] if t == INT_ARRAY else [t]


def _stmt_tokens(st: Stmt) -> tuple[str, ...]:
    if isinstance(st, Decl):
        toks = [st.name, ":", *_type_tokens(st.type)]
        if st.init is not None:
            toks += ["=", *token_strings(expr_str(st.init))]
        return tuple(toks)
    if isinstance(st, Assign):
        return tuple(
            token_strings(expr_str(st.target)) + (st.op,) + token_strings(expr_str(st.value))
        )
    if isinstance(st, (If, While)):
        return token_strings(expr_str(st.cond))
    if isinstance(st, For):
        return tuple(
            [st.var, "in", *token_strings(expr_str(st.lo)), "..", *token_strings(expr_str(st.hi))]
        )
    if isinstance(st, Return):
        return ("return",) if st.value is None else ("return", *token_strings(expr_str(st.value)))
    if isinstance(st, Call):
        toks = [st.func, "("]
        for i, arg in enumerate(st.args):
            if i:
                toks.append(",")
            toks.extend(token_strings(expr_str(arg)))
        toks.append(")")
        return tuple(toks)
    raise TypeError(f"not a statement: {st!r}")


class _Checker:
    """Declaration-order variable collection plus light type checking."""

    def __init__(self, params):
        self.var_types: dict[str, str] = {}
        self.variables: list[str] = []
        for name, t in params:
            self._declare(name, t)

    def _declare(self, name: str, t: str) -> None:
        if name in self.var_types:
            raise ParseError(f"duplicate declaration of {name!r}")
        self.var_types[name] = t
        self.variables.append(name)

    def _need_array(self, name: str) -> None:
        if self.var_types.get(name) != INT_ARRAY:
            raise ParseError(f"{name!r} is not an int array")

    def infer(self, e: Expr) -> str:
        if isinstance(e, IntLit):
            return INT
        if isinstance(e, BoolLit):
            return BOOL
        if isinstance(e, Var):
            if e.name not in self.var_types:
                raise ParseError(f"use of undeclared variable {e.name!r}")
            return self.var_types[e.name]
        if isinstance(e, Index):
            self._need_array(e.name)
            if self.infer(e.index) != INT:
                raise ParseError(f"array index into {e.name!r} must be int")
            return INT
        if isinstance(e, Len):
            self._need_array(e.name)
            return INT
        if isinstance(e, ArrayLit):
            for item in e.items:
                if self.infer(item) != INT:
                    raise ParseError("array literal elements must be int")
            return INT_ARRAY
        if isinstance(e, Unary):
            want = INT if e.op == "-" else BOOL
            if self.infer(e.operand) != want:
                raise ParseError(f"unary {e.op!r} needs a {want} operand")
            return want
        if isinstance(e, Binary):
            lt, rt = self.infer(e.left), self.infer(e.right)
            if e.op in ("+", "-", "*", "/", "%"):
                if lt != INT or rt != INT:
                    raise ParseError(f"arithmetic {e.op!r} needs int operands")
                return INT
            if e.op in ("<", "<=", ">", ">="):
                if lt != INT or rt != INT:
                    raise ParseError(f"comparison {e.op!r} needs int operands")
                return BOOL
            if e.op in ("==", "!="):
                if lt != rt or lt == INT_ARRAY:
                    raise ParseError(f"{e.op!r} needs matching scalar operands")
                return BOOL
            if e.op in ("&&", "||"):
                if lt != BOOL or rt != BOOL:
                    raise ParseError(f"logical {e.op!r} needs bool operands")
                return BOOL
        raise ParseError(f"unsupported expression: {e!r}")

    def check_block(self, body: list[Stmt], loop_vars: frozenset[str]) -> None:
        for st in body:
            self.check_stmt(st, loop_vars)

    def check_stmt(self, st: Stmt, loop_vars: frozenset[str]) -> None:
        if isinstance(st, Decl):
            if st.init is not None:
                t = self.infer(st.init)
                if t != st.type:
                    raise ParseError(f"initializer for {st.name!r} has type {t}, expected {st.type}")
                if isinstance(st.init, ArrayLit) and st.type != INT_ARRAY:
                    raise ParseError("array literal needs an int[] declaration")
            self._declare(st.name, st.type)
            return
        if isinstance(st, Assign):
            if isinstance(st.target, Index):
                self._need_array(st.target.name)
                if self.infer(st.target.index) != INT:
                    raise ParseError("array index must be int")
                target_type = INT
                written = st.target.name
            else:
                target_type = self.infer(st.target)
                if target_type == INT_ARRAY:
                    raise ParseError("whole-array assignment is not supported")
                written = st.target.name
            if written in loop_vars:
                raise ParseError(f"cannot assign to loop variable {written!r} inside its loop")
            vt = self.infer(st.value)
            if st.op == "=":
                if vt != target_type:
                    raise ParseError(f"assigning {vt} to {target_type} target")
            else:
                if target_type != INT or vt != INT:
                    raise ParseError(f"compound {st.op!r} needs int target and value")
            return
        if isinstance(st, If):
            if self.infer(st.cond) != BOOL:
                raise ParseError("if condition must be bool")
            self.check_block(st.then_body, loop_vars)
            self.check_block(st.else_body, loop_vars)
            return
        if isinstance(st, While):
            if self.infer(st.cond) != BOOL:
                raise ParseError("while condition must be bool")
            self.check_block(st.body, loop_vars)
            return
        if isinstance(st, For):
            if self.infer(st.lo) != INT or self.infer(st.hi) != INT:
                raise ParseError("for bounds must be int")
            self._declare(st.var, INT)
            self.check_block(st.body, loop_vars | {st.var})
            return
        if isinstance(st, Return):
            if st.value is not None:
                self.infer(st.value)
            return
        if isinstance(st, Call):
            if st.func != "swap" or len(st.args) != 3:
                raise ParseError("only swap(array, i, j) calls are supported")
            first = st.args[0]
            if not isinstance(first, Var):
                raise ParseError("swap's first argument must be an array variable")
            self._need_array(first.name)
            if self.infer(st.args[1]) != INT or self.infer(st.args[2]) != INT:
                raise ParseError("swap indices must be int")
            return
        raise ParseError(f"unsupported statement: {st!r}")


def finalize(name: str, params: tuple[tuple[str, str], ...], body: list[Stmt]) -> Program:
    checker = _Checker(params)
    checker.check_block(body, frozenset())

    statements: list[Stmt] = []
    branch_sites: list[int] = []

    def number(block: list[Stmt]) -> None:
        for st in block:
            st.sid = len(statements)
            statements.append(st)
            st.tokens = _stmt_tokens(st)
            if isinstance(st, GUARD_KINDS):
                branch_sites.append(st.sid)
            if isinstance(st, If):
                number(st.then_body)
                number(st.else_body)
            elif isinstance(st, (While, For)):
                number(st.body)

    number(body)

    text = program_str(name, params, body)
    return Program(
        name=name,
        params=params,
        body=body,
        statements=statements,
        variables=tuple(checker.variables),
        var_types=checker.var_types,
        branch_sites=tuple(branch_sites),
        text=text,
        tokens=token_strings(text),
    )


def parse_program(src: str) -> Program:
    return _Parser(src).parse_program()
