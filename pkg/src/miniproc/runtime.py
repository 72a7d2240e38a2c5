"""Call-by-value evaluator with proper tail calls.

Values are plain Python ``int`` (signed 64-bit, overflow-checked) and
``bool``.  ``bool`` is kept distinct from ``int`` everywhere: type tests
use ``type(v) is int`` so ``True`` never passes as a number.

Each procedure body is translated once into a tree of closures, one per
AST node, before evaluation starts.  A call in tail position does not
apply its callee; it returns a ``(callee, args, span)`` tuple to the
enclosing application loop, which rebinds and continues in the same
control frame.

Variable references are resolved to slot indices at translation time.
At run time an environment is a tuple of values: the argument tuple is
the procedure's frame and each ``let`` extends it into a new tuple.
"""

from __future__ import annotations

import sys
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from operator import itemgetter
from typing import Callable, Iterator, Mapping, TextIO, Union

from .syntax import (
    INT64_MAX,
    INT64_MIN,
    Call,
    Expr,
    If,
    Let,
    Num,
    Prim,
    ProcedureDecl,
    Program,
    SourceSpan,
    Var,
    children,
)

Value = Union[int, bool]
Environment = Mapping[str, Value]

# RuntimeError kinds
TYPE_ERROR = "TypeError"
INTEGER_OVERFLOW = "IntegerOverflow"
UNBOUND_VARIABLE = "UnboundVariable"
UNKNOWN_PROCEDURE = "UnknownProcedure"
ARITY_MISMATCH = "ArityMismatch"
FUEL_EXHAUSTED = "FuelExhausted"
STACK_OVERFLOW = "StackOverflow"

DEFAULT_MAX_DEPTH = 2000


class EvalError(Exception):
    def __init__(
        self,
        kind: str,
        message: str,
        span: SourceSpan,
        call_trace: list[tuple[str, SourceSpan]] | None = None,
    ):
        super().__init__(f"{kind} at {span}: {message}")
        self.kind = kind
        self.message = message
        self.span = span
        self.call_trace = call_trace or []

    def render(self) -> str:
        lines = [f"error {self.kind} {self.span}: {self.message}"]
        for name, span in reversed(self.call_trace):
            lines.append(f"  in {name} called at {span}")
        return "\n".join(lines)


@dataclass
class ExecStats:
    calls_made: int = 0
    prim_ops: int = 0
    max_control_depth: int = 0


def format_value(value: Value) -> str:
    if type(value) is bool:
        return "true" if value else "false"
    return str(value)


def _variant(value: Value) -> str:
    return "Bool" if type(value) is bool else "Int"


# ---------------------------------------------------------------- tail positions


def tail_positions(proc: ProcedureDecl) -> Iterator[tuple[Expr, bool]]:
    """Yield every node of ``proc.body`` with its tail-position flag."""
    stack: list[tuple[Expr, bool]] = [(proc.body, True)]
    while stack:
        node, tail = stack.pop()
        yield node, tail
        if isinstance(node, If):
            stack += [(node.cond, False), (node.then_branch, tail), (node.else_branch, tail)]
        elif isinstance(node, Let):
            stack += [(b.init, False) for b in node.bindings]
            stack.append((node.body, tail))
        else:
            stack += [(c, False) for c in children(node)]


def is_tail_position(proc: ProcedureDecl, node: Expr) -> bool:
    """Whether ``node`` (by identity) sits in tail position of ``proc``."""
    for candidate, tail in tail_positions(proc):
        if candidate is node:
            return tail
    raise ValueError(f"node is not part of procedure '{proc.name}'")


# ---------------------------------------------------------------- machine

Scope = tuple  # variable names by slot; the innermost binding is the last match


def _slot(scope: Scope, name: str) -> int | None:
    for i in range(len(scope) - 1, -1, -1):
        if scope[i] == name:
            return i
    return None


class _Proc:
    __slots__ = ("name", "params", "code", "tail_calls")

    def __init__(self, decl: ProcedureDecl):
        self.name = decl.name
        self.params = decl.param_names
        self.code: Callable[[tuple], object] | None = None
        # whether the body can hand back a tail-call request
        self.tail_calls = any(
            tail and isinstance(node, Call) for node, tail in tail_positions(decl)
        )


def _no_args(env):
    return ()


def _collector(args: list[Expr], codes: list, scope: Scope):
    """Closure evaluating call arguments left to right into a fresh tuple."""
    slots = [_slot(scope, a.name) if isinstance(a, Var) else None for a in args]
    if args and None not in slots:
        # all arguments are bound variables: one C-level gather
        if len(slots) == 1:
            return itemgetter(slice(slots[0], slots[0] + 1))
        return itemgetter(*slots)
    # unrolled for small arities: a comprehension costs an extra frame
    if not codes:
        return _no_args
    if len(codes) == 1:
        (a0,) = codes
        return lambda env: (a0(env),)
    if len(codes) == 2:
        a0, a1 = codes
        return lambda env: (a0(env), a1(env))
    if len(codes) == 3:
        a0, a1, a2 = codes
        return lambda env: (a0(env), a1(env), a2(env))
    return lambda env: tuple([a(env) for a in codes])


class _Machine:
    """Translated program plus the mutable state of one run.

    All closures are created inside ``__init__`` so that the hot counters
    live in shared cells rather than on an object.
    """

    def __init__(
        self,
        program: Program,
        fuel: int | None = None,
        trace: TextIO | None = None,
        max_depth: int = DEFAULT_MAX_DEPTH,
    ):
        self.program = program
        procs: dict[str, _Proc] = {}
        for decl in program.procedures:
            if decl.name not in procs:
                procs[decl.name] = _Proc(decl)
        self.procs = procs

        calls = 0
        prims = 0
        depth = 0
        peak = 0
        budget = fuel if fuel is not None else sys.maxsize

        def stats() -> ExecStats:
            return ExecStats(calls, prims, peak)

        self.stats = stats

        def leaf_caller(proc: _Proc, collect, span: SourceSpan):
            # same bookkeeping as caller() without the tail-call loop
            name = proc.name

            def call(env):
                nonlocal calls, depth, peak
                args = collect(env)
                depth += 1
                if depth > peak:
                    peak = depth
                    if depth > max_depth:
                        raise EvalError(
                            STACK_OVERFLOW, f"more than {max_depth} nested non-tail calls", span
                        )
                if calls >= budget:
                    raise EvalError(
                        FUEL_EXHAUSTED, f"fuel of {budget} procedure applications exhausted", span
                    )
                calls += 1
                if trace is not None:
                    shown = ",".join(map(format_value, args))
                    trace.write(f"call {name}({shown}) depth={depth}\n")
                    trace.flush()
                try:
                    result = proc.code(args)
                except EvalError as err:
                    err.call_trace.append((name, span))
                    raise
                depth -= 1
                return result

            return call

        def caller(callee: _Proc, collect, site: SourceSpan):
            """Closure applying ``callee`` to the collected arguments.

            Runs the callee and every tail call it makes in one control
            frame; returns only when a procedure body yields a value.
            """
            if not callee.tail_calls:
                return leaf_caller(callee, collect, site)

            def call(env):
                nonlocal calls, depth, peak
                proc = callee
                span = site
                args = collect(env)
                depth += 1
                if depth > peak:
                    peak = depth
                    if depth > max_depth:
                        raise EvalError(
                            STACK_OVERFLOW, f"more than {max_depth} nested non-tail calls", span
                        )
                try:
                    while True:
                        if calls >= budget:
                            raise EvalError(
                                FUEL_EXHAUSTED,
                                f"fuel of {budget} procedure applications exhausted",
                                span,
                            )
                        calls += 1
                        if trace is not None:
                            shown = ",".join(map(format_value, args))
                            trace.write(f"call {proc.name}({shown}) depth={depth}\n")
                            trace.flush()
                        # the argument tuple is the callee's frame
                        result = proc.code(args)
                        if type(result) is tuple:
                            proc, args, span = result
                            continue
                        depth -= 1
                        return result
                except EvalError as err:
                    # unwinding: record this still-active frame, innermost first
                    err.call_trace.append((proc.name, span))
                    raise

            return call

        # compile(expr, scope, tail) returns a closure env -> value.
        # Closures compiled with tail=True may instead return a
        # (proc, args, span) tuple requesting a tail call.

        def compile(expr: Expr, scope: Scope, tail: bool = False):
            if isinstance(expr, Num):
                return compile_num(expr)
            if isinstance(expr, Var):
                return compile_var(expr, scope)
            if isinstance(expr, Prim):
                return compile_prim(expr, scope)
            if isinstance(expr, Call):
                return compile_call(expr, scope, tail)
            if isinstance(expr, Let):
                return compile_let(expr, scope, tail)
            if isinstance(expr, If):
                return compile_if(expr, scope, tail)
            raise TypeError(f"not an expression: {expr!r}")

        def compile_num(expr: Num):
            value = expr.value
            span = expr.span
            if INT64_MIN <= value <= INT64_MAX:
                return lambda env: value

            def num(env):
                raise EvalError(INTEGER_OVERFLOW, f"literal {value} out of 64-bit range", span)

            return num

        def compile_var(expr: Var, scope: Scope):
            slot = _slot(scope, expr.name)
            if slot is not None:
                return itemgetter(slot)
            name = expr.name
            span = expr.span

            def unbound(env):
                raise EvalError(UNBOUND_VARIABLE, f"unbound variable '{name}'", span)

            return unbound

        def compile_prim(expr: Prim, scope: Scope):
            op = expr.opname
            left = compile(expr.left, scope)
            right = compile(expr.right, scope)
            span = expr.span

            def bad_operands(a, b):
                culprit = a if type(a) is not int else b
                return EvalError(
                    TYPE_ERROR, f"operand of '{op}' must be Int, got {_variant(culprit)}", span
                )

            def overflow(a, b):
                return EvalError(
                    INTEGER_OVERFLOW, f"{op}({a},{b}) overflows a signed 64-bit integer", span
                )

            if op == "+":

                def prim(env):
                    nonlocal prims
                    a = left(env)
                    b = right(env)
                    prims += 1
                    if type(a) is not int or type(b) is not int:
                        raise bad_operands(a, b)
                    r = a + b
                    if INT64_MIN <= r <= INT64_MAX:
                        return r
                    raise overflow(a, b)

            elif op == "-":

                def prim(env):
                    nonlocal prims
                    a = left(env)
                    b = right(env)
                    prims += 1
                    if type(a) is not int or type(b) is not int:
                        raise bad_operands(a, b)
                    r = a - b
                    if INT64_MIN <= r <= INT64_MAX:
                        return r
                    raise overflow(a, b)

            elif op == "*":

                def prim(env):
                    nonlocal prims
                    a = left(env)
                    b = right(env)
                    prims += 1
                    if type(a) is not int or type(b) is not int:
                        raise bad_operands(a, b)
                    r = a * b
                    if INT64_MIN <= r <= INT64_MAX:
                        return r
                    raise overflow(a, b)

            elif op == "lt?":

                def prim(env):
                    nonlocal prims
                    a = left(env)
                    b = right(env)
                    prims += 1
                    if type(a) is not int or type(b) is not int:
                        raise bad_operands(a, b)
                    return a < b

            else:
                raise ValueError(f"unknown primitive {op!r}")
            return prim

        def compile_call(expr: Call, scope: Scope, tail: bool):
            args = [compile(a, scope) for a in expr.args]
            span = expr.span
            name = expr.procname
            proc = procs.get(name)
            if proc is None or len(proc.params) != len(args):
                if proc is None:
                    kind, message = UNKNOWN_PROCEDURE, f"no procedure named '{name}'"
                else:
                    kind = ARITY_MISMATCH
                    message = (
                        f"procedure '{name}' takes {len(proc.params)} argument(s),"
                        f" got {len(args)}"
                    )

                def bad_call(env):
                    for a in args:
                        a(env)
                    raise EvalError(kind, message, span)

                return bad_call

            collect = _collector(expr.args, args, scope)
            if tail:
                return lambda env: (proc, collect(env), span)
            return caller(proc, collect, span)

        def compile_let(expr: Let, scope: Scope, tail: bool):
            inits = []
            for b in expr.bindings:
                inits.append(compile(b.init, scope))
                scope = scope + (b.name,)
            body = compile(expr.body, scope, tail)

            if len(inits) == 1:
                (init,) = inits

                def let(env):
                    return body(env + (init(env),))

                return let

            def let(env):
                for init in inits:
                    env = env + (init(env),)
                return body(env)

            return let

        def compile_if(expr: If, scope: Scope, tail: bool):
            cond = compile(expr.cond, scope)
            then_branch = compile(expr.then_branch, scope, tail)
            else_branch = compile(expr.else_branch, scope, tail)
            span = expr.cond.span

            def if_(env):
                c = cond(env)
                if c is True:
                    return then_branch(env)
                if c is False:
                    return else_branch(env)
                raise EvalError(TYPE_ERROR, f"if condition must be Bool, got {_variant(c)}", span)

            return if_

        self.caller = caller
        self.compile = compile
        for decl in program.procedures:
            proc = procs[decl.name]
            if proc.code is None:
                proc.code = compile(decl.body, proc.params, True)

    def run(self, entry: str) -> Value:
        proc = self.procs.get(entry)
        decl = self.program.find(entry)
        if proc is None or decl is None:
            raise EvalError(UNKNOWN_PROCEDURE, f"no procedure named '{entry}'", self.program.span)
        if proc.params:
            raise EvalError(
                ARITY_MISMATCH,
                f"entry procedure '{entry}' takes {len(proc.params)} argument(s), got 0",
                decl.span,
            )
        return self.caller(proc, _no_args, decl.span)(())


_headroom_lock = threading.Lock()
_headroom_users = 0
_headroom_saved = 0


@contextmanager
def _recursion_headroom(limit: int):
    # the limit is process-wide: restore it only when the last run leaves
    global _headroom_users, _headroom_saved
    with _headroom_lock:
        if _headroom_users == 0:
            _headroom_saved = sys.getrecursionlimit()
        _headroom_users += 1
        if limit > sys.getrecursionlimit():
            sys.setrecursionlimit(limit)
    try:
        yield
    finally:
        with _headroom_lock:
            _headroom_users -= 1
            if _headroom_users == 0:
                sys.setrecursionlimit(_headroom_saved)


def eval_program(
    program: Program,
    entry: str = "main",
    fuel: int | None = None,
    trace: bool | TextIO = False,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> tuple[Value, ExecStats]:
    """Run ``entry`` and return its value with execution statistics.

    ``trace`` may be ``True`` (write to stderr) or an open text stream.
    ``fuel`` bounds the total number of procedure applications.
    Raises :class:`EvalError` on any runtime fault.
    """
    if fuel is not None and fuel < 1:
        raise ValueError("fuel must be at least 1")
    stream = sys.stderr if trace is True else (trace or None)
    # a few interpreter frames per control frame, plus nesting inside bodies
    with _recursion_headroom(max_depth * 8 + 1000):
        try:
            machine = _Machine(program, fuel, stream, max_depth)
            value = machine.run(entry)
        except RecursionError:
            raise EvalError(STACK_OVERFLOW, "expression nesting too deep", program.span) from None
    return value, machine.stats()


def eval_expr(expr: Expr, env: Environment, program: Program) -> Value:
    """Evaluate one expression under ``env`` against ``program``'s procedures."""
    with _recursion_headroom(DEFAULT_MAX_DEPTH * 8 + 1000):
        machine = _Machine(program)
        return machine.compile(expr, tuple(env))(tuple(env.values()))
