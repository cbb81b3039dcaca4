"""A tiny traced imperative language: parse, type-check, execute, record traces."""
from .interp import (
    BOTTOM,
    ExecutionTrace,
    InputConfig,
    RuntimeFault,
    StepLimit,
    StepLimitExceeded,
    branch_coverage,
    execute,
    observable_state,
    random_inputs,
)
from .io import (
    read_execution_traces,
    rehydrate_trace,
    trace_to_json,
    value_from_json,
    value_to_json,
    write_execution_traces,
)
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
    expr_str,
    program_str,
    stmt_kind,
)
from .parser import MinilangError, ParseError, parse_program, token_strings, tokenize

__all__ = [
    "BOTTOM",
    "BOOL",
    "INT",
    "INT_ARRAY",
    "MAX_ARRAY_LEN",
    "ArrayLit",
    "Assign",
    "Binary",
    "BoolLit",
    "Call",
    "Decl",
    "Expr",
    "ExecutionTrace",
    "For",
    "If",
    "InputConfig",
    "IntLit",
    "Index",
    "Len",
    "MinilangError",
    "ParseError",
    "Program",
    "Return",
    "RuntimeFault",
    "Stmt",
    "StepLimit",
    "StepLimitExceeded",
    "Unary",
    "Var",
    "While",
    "branch_coverage",
    "execute",
    "expr_str",
    "observable_state",
    "parse_program",
    "program_str",
    "random_inputs",
    "read_execution_traces",
    "rehydrate_trace",
    "stmt_kind",
    "token_strings",
    "tokenize",
    "trace_to_json",
    "value_from_json",
    "value_to_json",
    "write_execution_traces",
]
