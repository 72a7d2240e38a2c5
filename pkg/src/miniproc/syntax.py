"""Lexer, recursive-descent parser and pretty-printer.

Spans use 1-based lines and columns; ``end_col`` is one past the last
character of the construct, so an empty construct (``eof``) has
``start == end``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union

KEYWORDS = frozenset(
    ["program", "procedure", "call", "let", "in", "if", "then", "else"]
)
PRIM_NAMES = ("+", "-", "*", "lt?")
RESERVED = KEYWORDS | {"lt?"}

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1


@dataclass(frozen=True, order=True)
class SourceSpan:
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def __str__(self) -> str:
        return f"{self.start_line}:{self.start_col}"

    def to(self, other: SourceSpan) -> SourceSpan:
        """Span from the start of ``self`` to the end of ``other``."""
        return SourceSpan(self.start_line, self.start_col, other.end_line, other.end_col)

    def contains(self, other: SourceSpan) -> bool:
        return (self.start_line, self.start_col) <= (other.start_line, other.start_col) and (
            other.end_line,
            other.end_col,
        ) <= (self.end_line, self.end_col)


# Placeholder for hand-built AST nodes; never produced by the parser.
NOWHERE = SourceSpan(0, 0, 0, 0)


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    code: str
    message: str
    span: SourceSpan

    def render(self) -> str:
        return f"{self.severity} {self.code} {self.span}: {self.message}"


class SyntaxFailure(Exception):
    """Raised by :func:`tokenize` and :func:`parse`; carries one diagnostic."""

    def __init__(self, diagnostic: Diagnostic):
        super().__init__(diagnostic.render())
        self.diagnostic = diagnostic


def _fail(code: str, message: str, span: SourceSpan) -> SyntaxFailure:
    return SyntaxFailure(Diagnostic("error", code, message, span))


# ---------------------------------------------------------------- tokens


@dataclass(frozen=True)
class Token:
    # kind: "keyword", "ident", "number", "op", "lparen", "rparen",
    # "lbrace", "rbrace", "comma", "equals" or "eof"
    kind: str
    text: str
    span: SourceSpan

    def describe(self) -> str:
        if self.kind == "eof":
            return "end of input"
        if self.kind in ("keyword", "ident", "number"):
            return f"{self.kind} '{self.text}'"
        return f"'{self.text}'"


_PUNCT = {
    "(": "lparen",
    ")": "rparen",
    "{": "lbrace",
    "}": "rbrace",
    ",": "comma",
    "=": "equals",
    "+": "op",
    "-": "op",
    "*": "op",
}


def _is_letter(c: str) -> bool:
    return ("a" <= c <= "z") or ("A" <= c <= "Z")


def _is_digit(c: str) -> bool:
    return "0" <= c <= "9"


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    i, n = 0, len(source)
    line, col = 1, 1

    def span(length: int) -> SourceSpan:
        return SourceSpan(line, col, line, col + length)

    while i < n:
        c = source[i]
        if c == "\n":
            i += 1
            line, col = line + 1, 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "/" and source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        if c in _PUNCT:
            tokens.append(Token(_PUNCT[c], c, span(1)))
            i += 1
            col += 1
            continue
        if _is_digit(c):
            j = i
            while j < n and _is_digit(source[j]):
                j += 1
            digits = source[i:j]
            sp = span(j - i)
            if int(digits) > INT64_MAX:
                raise _fail(
                    "NUMBER_OVERFLOW",
                    f"integer literal {digits} does not fit in a signed 64-bit integer",
                    sp,
                )
            tokens.append(Token("number", digits, sp))
            col += j - i
            i = j
            continue
        if _is_letter(c):
            j = i + 1
            while j < n and (_is_letter(source[j]) or _is_digit(source[j])):
                j += 1
            if j < n and source[j] == "?":
                j += 1
            word = source[i:j]
            kind = "keyword" if word in KEYWORDS else "ident"
            tokens.append(Token(kind, word, span(j - i)))
            col += j - i
            i = j
            continue
        raise _fail("UNEXPECTED_CHAR", f"unexpected character {c!r}", span(1))

    tokens.append(Token("eof", "", SourceSpan(line, col, line, col)))
    return tokens


# ---------------------------------------------------------------- AST
# Spans are excluded from equality so that structural comparison of
# ASTs ignores source positions.


@dataclass(frozen=True)
class Num:
    value: int
    span: SourceSpan = field(default=NOWHERE, compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    name: str
    span: SourceSpan = field(default=NOWHERE, compare=False, repr=False)


@dataclass(frozen=True)
class Call:
    procname: str
    args: tuple[Expr, ...]
    span: SourceSpan = field(default=NOWHERE, compare=False, repr=False)


@dataclass(frozen=True)
class Prim:
    opname: str
    left: Expr
    right: Expr
    span: SourceSpan = field(default=NOWHERE, compare=False, repr=False)


@dataclass(frozen=True)
class Binding:
    name: str
    init: Expr
    span: SourceSpan = field(default=NOWHERE, compare=False, repr=False)


@dataclass(frozen=True)
class Let:
    bindings: tuple[Binding, ...]
    body: Expr
    span: SourceSpan = field(default=NOWHERE, compare=False, repr=False)


@dataclass(frozen=True)
class If:
    cond: Expr
    then_branch: Expr
    else_branch: Expr
    span: SourceSpan = field(default=NOWHERE, compare=False, repr=False)


Expr = Union[Num, Var, Call, Prim, Let, If]


@dataclass(frozen=True)
class Param:
    name: str
    span: SourceSpan = field(default=NOWHERE, compare=False, repr=False)


@dataclass(frozen=True)
class ProcedureDecl:
    name: str
    params: tuple[Param, ...]
    body: Expr
    span: SourceSpan = field(default=NOWHERE, compare=False, repr=False)
    name_span: SourceSpan = field(default=NOWHERE, compare=False, repr=False)

    @property
    def param_names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.params)


@dataclass(frozen=True)
class Program:
    procedures: tuple[ProcedureDecl, ...]
    span: SourceSpan = field(default=NOWHERE, compare=False, repr=False)

    def find(self, name: str) -> ProcedureDecl | None:
        """First procedure declared under ``name``."""
        for proc in self.procedures:
            if proc.name == name:
                return proc
        return None


def children(expr: Expr) -> Iterator[Expr]:
    if isinstance(expr, Call):
        yield from expr.args
    elif isinstance(expr, Prim):
        yield expr.left
        yield expr.right
    elif isinstance(expr, Let):
        for b in expr.bindings:
            yield b.init
        yield expr.body
    elif isinstance(expr, If):
        yield expr.cond
        yield expr.then_branch
        yield expr.else_branch


def walk(expr: Expr) -> Iterator[Expr]:
    """Pre-order traversal of ``expr`` and all its subexpressions."""
    stack = [expr]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(list(children(node))))


# ---------------------------------------------------------------- parser


class _Parser:
    def __init__(self, tokens: list[Token]):
        if not tokens or tokens[-1].kind != "eof":
            raise ValueError("token stream must end with eof")
        self.tokens = tokens
        self.pos = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def error(self, expected: list[str]) -> SyntaxFailure:
        tok = self.tok
        want = " or ".join(expected)
        return _fail("UNEXPECTED_TOKEN", f"expected {want}, found {tok.describe()}", tok.span)

    def expect(self, kind: str, text: str | None = None) -> Token:
        tok = self.tok
        if tok.kind == kind and (text is None or tok.text == text):
            return self.advance()
        raise self.error([f"'{text}'" if text else _KIND_NAMES.get(kind, kind)])

    def at(self, kind: str, text: str | None = None) -> bool:
        tok = self.tok
        return tok.kind == kind and (text is None or tok.text == text)

    def program(self) -> Program:
        start = self.expect("keyword", "program")
        self.expect("lbrace")
        procs = []
        while self.at("keyword", "procedure"):
            procs.append(self.procedure())
        if not self.at("rbrace"):
            raise self.error(["'procedure'", "'}'"])
        end = self.advance()
        if not self.at("eof"):
            raise self.error(["end of input"])
        return Program(tuple(procs), start.span.to(end.span))

    def procedure(self) -> ProcedureDecl:
        start = self.expect("keyword", "procedure")
        name = self.expect("ident")
        self.expect("lparen")
        params = []
        if self.at("ident"):
            while True:
                p = self.expect("ident")
                params.append(Param(p.text, p.span))
                if not self.at("comma"):
                    break
                self.advance()
        if not self.at("rparen"):
            raise self.error(["identifier", "')'"] if not params else ["','", "')'"])
        self.advance()
        self.expect("lbrace")
        body = self.expr()
        end = self.expect("rbrace")
        return ProcedureDecl(name.text, tuple(params), body, start.span.to(end.span), name.span)

    def expr(self) -> Expr:
        tok = self.tok
        if tok.kind == "number":
            self.advance()
            return Num(int(tok.text), tok.span)
        if tok.kind == "op" or (tok.kind == "ident" and tok.text == "lt?"):
            if tok.kind == "op" or self.tokens[self.pos + 1].kind == "lparen":
                return self.prim()
        if tok.kind == "ident":
            self.advance()
            return Var(tok.text, tok.span)
        if tok.kind == "keyword":
            if tok.text == "call":
                return self.call()
            if tok.text == "let":
                return self.let()
            if tok.text == "if":
                return self.if_()
        raise self.error(["expression"])

    def prim(self) -> Prim:
        op = self.advance()
        self.expect("lparen")
        left = self.expr()
        self.expect("comma")
        right = self.expr()
        end = self.expect("rparen")
        return Prim(op.text, left, right, op.span.to(end.span))

    def call(self) -> Call:
        start = self.advance()
        name = self.expect("ident")
        self.expect("lparen")
        args = []
        if not self.at("rparen"):
            args.append(self.expr())
            while self.at("comma"):
                self.advance()
                args.append(self.expr())
        end = self.expect("rparen")
        return Call(name.text, tuple(args), start.span.to(end.span))

    def let(self) -> Let:
        start = self.advance()
        bindings = [self.binding()]
        while self.at("comma"):
            self.advance()
            bindings.append(self.binding())
        if not self.at("keyword", "in"):
            raise self.error(["','", "'in'"])
        self.advance()
        body = self.expr()
        return Let(tuple(bindings), body, start.span.to(body.span))

    def binding(self) -> Binding:
        name = self.expect("ident")
        self.expect("equals")
        init = self.expr()
        return Binding(name.text, init, name.span.to(init.span))

    def if_(self) -> If:
        start = self.advance()
        cond = self.expr()
        self.expect("keyword", "then")
        then_branch = self.expr()
        self.expect("keyword", "else")
        else_branch = self.expr()
        return If(cond, then_branch, else_branch, start.span.to(else_branch.span))


_KIND_NAMES = {
    "ident": "identifier",
    "number": "number",
    "lparen": "'('",
    "rparen": "')'",
    "lbrace": "'{'",
    "rbrace": "'}'",
    "comma": "','",
    "equals": "'='",
    "eof": "end of input",
}


def parse(tokens: list[Token]) -> Program:
    parser = _Parser(tokens)
    try:
        return parser.program()
    except RecursionError:
        raise _fail("NESTING_TOO_DEEP", "expression nesting too deep", parser.tok.span) from None


def parse_source(source: str) -> Program:
    """Shorthand for ``parse(tokenize(source))``."""
    return parse(tokenize(source))


# ---------------------------------------------------------------- printing


def format_expr(expr: Expr) -> str:
    """Canonical concrete syntax for a single expression."""
    if isinstance(expr, Num):
        return str(expr.value)
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Call):
        return f"call {expr.procname}({','.join(format_expr(a) for a in expr.args)})"
    if isinstance(expr, Prim):
        return f"{expr.opname}({format_expr(expr.left)},{format_expr(expr.right)})"
    if isinstance(expr, Let):
        binds = ", ".join(f"{b.name} = {format_expr(b.init)}" for b in expr.bindings)
        return f"let {binds} in {format_expr(expr.body)}"
    if isinstance(expr, If):
        return (
            f"if {format_expr(expr.cond)} then {format_expr(expr.then_branch)}"
            f" else {format_expr(expr.else_branch)}"
        )
    raise TypeError(f"not an expression: {expr!r}")


def pretty_print(program: Program) -> str:
    lines = ["program {"]
    for proc in program.procedures:
        lines.append(f"\tprocedure {proc.name}({','.join(proc.param_names)}) {{")
        lines.append(f"\t\t{format_expr(proc.body)}")
        lines.append("\t}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def sexp_expr(expr: Expr) -> str:
    if isinstance(expr, Num):
        return f"(num {expr.value})"
    if isinstance(expr, Var):
        return f"(var {expr.name})"
    if isinstance(expr, Call):
        return "(call " + " ".join([expr.procname, *map(sexp_expr, expr.args)]) + ")"
    if isinstance(expr, Prim):
        return f"(prim {expr.opname} {sexp_expr(expr.left)} {sexp_expr(expr.right)})"
    if isinstance(expr, Let):
        binds = " ".join(f"({b.name} {sexp_expr(b.init)})" for b in expr.bindings)
        return f"(let ({binds}) {sexp_expr(expr.body)})"
    if isinstance(expr, If):
        parts = map(sexp_expr, (expr.cond, expr.then_branch, expr.else_branch))
        return "(if " + " ".join(parts) + ")"
    raise TypeError(f"not an expression: {expr!r}")


def dump_ast(program: Program) -> str:
    """S-expression dump, one procedure per line."""
    if not program.procedures:
        return "(program)\n"
    procs = [
        f"  (procedure {p.name} ({' '.join(p.param_names)}) {sexp_expr(p.body)})"
        for p in program.procedures
    ]
    return "(program\n" + "\n".join(procs) + ")\n"
