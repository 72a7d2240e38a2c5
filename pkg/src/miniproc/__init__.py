"""Toolchain for a small first-order procedural language.

Typical use::

    from miniproc import parse_source, analyze, eval_program

    program = parse_source(text)
    report = analyze(program)
    if report.runnable:
        value, stats = eval_program(program)
"""

from .analysis import AnalysisReport, analyze, reachable_set
from .runtime import EvalError, ExecStats, eval_expr, eval_program, format_value, is_tail_position
from .syntax import (
    Diagnostic,
    Program,
    SourceSpan,
    SyntaxFailure,
    Token,
    dump_ast,
    parse,
    parse_source,
    pretty_print,
    tokenize,
)

__all__ = [
    "AnalysisReport",
    "Diagnostic",
    "EvalError",
    "ExecStats",
    "Program",
    "SourceSpan",
    "SyntaxFailure",
    "Token",
    "analyze",
    "dump_ast",
    "eval_expr",
    "eval_program",
    "format_value",
    "is_tail_position",
    "parse",
    "parse_source",
    "pretty_print",
    "reachable_set",
    "tokenize",
]
