"""Static checks run before evaluation: names, arity, reachability."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .syntax import (
    RESERVED,
    Call,
    Diagnostic,
    Expr,
    Let,
    ProcedureDecl,
    Program,
    SourceSpan,
    Var,
    children,
    walk,
)

ERROR = "error"
WARNING = "warning"

# Diagnostic codes
UNBOUND_VAR = "UNBOUND_VAR"
ARITY_MISMATCH = "ARITY_MISMATCH"
DUP_PROC = "DUP_PROC"
DUP_PARAM = "DUP_PARAM"
UNKNOWN_PROC = "UNKNOWN_PROC"
RESERVED_NAME = "RESERVED_NAME"
NO_ENTRY = "NO_ENTRY"
ENTRY_ARITY = "ENTRY_ARITY"
UNREACHABLE_PROC = "UNREACHABLE_PROC"
UNUSED_PARAM = "UNUSED_PARAM"
UNUSED_BINDING = "UNUSED_BINDING"


@dataclass
class AnalysisReport:
    diagnostics: list[Diagnostic] = field(default_factory=list)
    call_graph: dict[str, set[str]] = field(default_factory=dict)
    reachable: set[str] = field(default_factory=set)

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == ERROR]

    @property
    def warnings(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == WARNING]

    @property
    def runnable(self) -> bool:
        return not self.errors

    def codes(self) -> list[str]:
        return [d.code for d in self.diagnostics]


def reachable_set(call_graph: Mapping[str, set[str]], entry: str) -> set[str]:
    if entry not in call_graph:
        return set()
    seen = {entry}
    todo = [entry]
    while todo:
        for callee in call_graph.get(todo.pop(), ()):
            if callee not in seen:
                seen.add(callee)
                todo.append(callee)
    return seen


class _Scope:
    """A lexical binding with a use counter."""

    __slots__ = ("name", "span", "kind", "uses", "parent")

    def __init__(self, name: str, span: SourceSpan, kind: str, parent: _Scope | None):
        self.name = name
        self.span = span
        self.kind = kind
        self.uses = 0
        self.parent = parent

    def lookup(self, name: str) -> _Scope | None:
        scope: _Scope | None = self
        while scope is not None:
            if scope.name == name:
                return scope
            scope = scope.parent
        return None


class _Checker:
    def __init__(self, program: Program):
        self.program = program
        self.diags: list[Diagnostic] = []
        self.procs: dict[str, ProcedureDecl] = {}

    def report(self, severity: str, code: str, message: str, span: SourceSpan) -> None:
        self.diags.append(Diagnostic(severity, code, message, span))

    def check_name(self, name: str, what: str, span: SourceSpan) -> None:
        if name in RESERVED:
            self.report(ERROR, RESERVED_NAME, f"'{name}' is reserved and cannot name a {what}", span)

    def declare_procedures(self) -> None:
        for proc in self.program.procedures:
            self.check_name(proc.name, "procedure", proc.name_span)
            if proc.name in self.procs:
                first = self.procs[proc.name].name_span
                self.report(
                    ERROR,
                    DUP_PROC,
                    f"procedure '{proc.name}' already declared at {first}",
                    proc.name_span,
                )
            else:
                self.procs[proc.name] = proc

    def check_procedure(self, proc: ProcedureDecl) -> None:
        scope: _Scope | None = None
        params: list[_Scope] = []
        seen: set[str] = set()
        for p in proc.params:
            self.check_name(p.name, "parameter", p.span)
            if p.name in seen:
                self.report(
                    ERROR,
                    DUP_PARAM,
                    f"duplicate parameter '{p.name}' in procedure '{proc.name}'",
                    p.span,
                )
                continue
            seen.add(p.name)
            scope = _Scope(p.name, p.span, "parameter", scope)
            params.append(scope)
        self.check_expr(proc.body, scope)
        for param in params:
            if param.uses == 0:
                self.report(
                    WARNING,
                    UNUSED_PARAM,
                    f"parameter '{param.name}' of procedure '{proc.name}' is never used",
                    param.span,
                )

    def check_expr(self, expr: Expr, scope: _Scope | None) -> None:
        if isinstance(expr, Var):
            found = scope.lookup(expr.name) if scope else None
            if found is None:
                self.report(ERROR, UNBOUND_VAR, f"unbound variable '{expr.name}'", expr.span)
            else:
                found.uses += 1
        elif isinstance(expr, Let):
            bound = []
            for b in expr.bindings:
                self.check_expr(b.init, scope)
                self.check_name(b.name, "variable", b.span)
                scope = _Scope(b.name, b.span, "binding", scope)
                bound.append(scope)
            self.check_expr(expr.body, scope)
            for b in bound:
                if b.uses == 0:
                    self.report(
                        WARNING, UNUSED_BINDING, f"let-binding '{b.name}' is never used", b.span
                    )
        else:
            if isinstance(expr, Call):
                self.check_call(expr)
            for child in children(expr):
                self.check_expr(child, scope)

    def check_call(self, call: Call) -> None:
        callee = self.procs.get(call.procname)
        if callee is None:
            self.report(ERROR, UNKNOWN_PROC, f"call to undeclared procedure '{call.procname}'", call.span)
        elif len(call.args) != len(callee.params):
            self.report(
                ERROR,
                ARITY_MISMATCH,
                f"procedure '{call.procname}' takes {len(callee.params)} argument(s),"
                f" called with {len(call.args)}",
                call.span,
            )


def build_call_graph(program: Program) -> dict[str, set[str]]:
    """Edges from each declared procedure to the declared procedures it calls.

    Duplicate declarations contribute only their first occurrence.
    """
    declared = {p.name for p in program.procedures}
    graph: dict[str, set[str]] = {}
    for proc in program.procedures:
        if proc.name in graph:
            continue
        graph[proc.name] = {
            node.procname
            for node in walk(proc.body)
            if isinstance(node, Call) and node.procname in declared
        }
    return graph


def analyze(program: Program, entry: str = "main") -> AnalysisReport:
    checker = _Checker(program)
    checker.declare_procedures()
    for proc in program.procedures:
        checker.check_procedure(proc)

    graph = build_call_graph(program)
    reachable = reachable_set(graph, entry)
    entry_proc = checker.procs.get(entry)
    if entry_proc is None:
        checker.report(ERROR, NO_ENTRY, f"entry procedure '{entry}' is not declared", program.span)
    else:
        if entry_proc.params:
            checker.report(
                ERROR,
                ENTRY_ARITY,
                f"entry procedure '{entry}' must take no parameters,"
                f" but declares {len(entry_proc.params)}",
                entry_proc.name_span,
            )
        for name, proc in checker.procs.items():
            if name not in reachable:
                checker.report(
                    WARNING,
                    UNREACHABLE_PROC,
                    f"procedure '{name}' is unreachable from '{entry}'",
                    proc.name_span,
                )

    # errors first, then warnings; source order inside each group
    diags = sorted(
        checker.diags,
        key=lambda d: (d.severity != ERROR, d.span.start_line, d.span.start_col),
    )
    return AnalysisReport(diags, graph, reachable)
