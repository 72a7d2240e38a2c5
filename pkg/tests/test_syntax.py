import pytest
from hypothesis import given, settings

from miniproc.syntax import (
    INT64_MAX,
    Binding,
    Call,
    If,
    Let,
    Num,
    Prim,
    ProcedureDecl,
    Program,
    SourceSpan,
    SyntaxFailure,
    Var,
    dump_ast,
    format_expr,
    parse,
    parse_source,
    pretty_print,
    tokenize,
    walk,
)
from tests.helpers import LISTING
from tests.strategies import exprs, programs


def kinds(source):
    return [(t.kind, t.text) for t in tokenize(source)]


# ---------------------------------------------------------------- lexer


def test_tokenize_prim_head():
    assert kinds("lt?(5,0)") == [
        ("ident", "lt?"),
        ("lparen", "("),
        ("number", "5"),
        ("comma", ","),
        ("number", "0"),
        ("rparen", ")"),
        ("eof", ""),
    ]


def test_tokenize_empty():
    assert kinds("") == [("eof", "")]


def test_tokenize_call():
    assert kinds("call SQRT(5)") == [
        ("keyword", "call"),
        ("ident", "SQRT"),
        ("lparen", "("),
        ("number", "5"),
        ("rparen", ")"),
        ("eof", ""),
    ]


def test_keywords_never_idents():
    toks = tokenize("program procedure call let in if then else")
    assert all(t.kind == "keyword" for t in toks[:-1])


def test_question_mark_only_trailing():
    assert kinds("IsPreciseEnough?")[0] == ("ident", "IsPreciseEnough?")
    # a second `?` cannot continue the identifier
    with pytest.raises(SyntaxFailure) as exc:
        tokenize("a??")
    assert exc.value.diagnostic.code == "UNEXPECTED_CHAR"
    assert kinds("a?b")[:2] == [("ident", "a?"), ("ident", "b")]


def test_case_sensitive_keywords():
    assert kinds("Call")[0] == ("ident", "Call")


def test_comments_and_whitespace():
    src = "// header\n  1 // trailing\r\n\t2"
    assert kinds(src) == [("number", "1"), ("number", "2"), ("eof", "")]


def test_spans_cover_lexemes():
    toks = tokenize("program {\n\tprocedure main() {1}\n}")
    proc = toks[2]
    assert proc.text == "procedure"
    assert proc.span == SourceSpan(2, 2, 2, 11)
    assert toks[-1].kind == "eof"


def test_token_spans_ordered_and_disjoint():
    toks = tokenize(LISTING)
    for a, b in zip(toks, toks[1:]):
        assert (a.span.end_line, a.span.end_col) <= (b.span.start_line, b.span.start_col)


@pytest.mark.parametrize("source,code", [("_x", "UNEXPECTED_CHAR"), ("1.5", "UNEXPECTED_CHAR"), ("/", "UNEXPECTED_CHAR")])
def test_unexpected_character(source, code):
    with pytest.raises(SyntaxFailure) as exc:
        tokenize(source)
    assert exc.value.diagnostic.code == code


def test_number_bounds():
    assert tokenize(str(INT64_MAX))[0].text == str(INT64_MAX)
    with pytest.raises(SyntaxFailure) as exc:
        tokenize("x " + str(INT64_MAX + 1))
    diag = exc.value.diagnostic
    assert diag.code == "NUMBER_OVERFLOW"
    assert diag.span == SourceSpan(1, 3, 1, 22)


def test_leading_zeros_allowed():
    assert parse_source("program { procedure main() {007} }").procedures[0].body == Num(7)


# ---------------------------------------------------------------- parser


def test_parse_listing():
    program = parse_source(LISTING)
    assert [p.name for p in program.procedures] == [
        "SQRT",
        "SqrtIter",
        "Improve",
        "Precision",
        "IsPreciseEnough?",
        "Square",
        "Abs",
        "main",
    ]


def test_parse_listing_structure():
    program = parse_source(LISTING)
    sqrt = program.find("SQRT")
    assert sqrt.body == Call(
        "SqrtIter", (Num(0), Var("radicand"), Call("Precision", (Var("radicand"),)))
    )
    it = program.find("SqrtIter")
    assert it.param_names == ("approximation", "radicand", "precision")
    assert it.body == Let(
        (
            Binding(
                "bid",
                Call("Improve", (Var("approximation"), Var("radicand"), Var("precision"))),
            ),
        ),
        If(
            Call("IsPreciseEnough?", (Var("bid"), Var("radicand"))),
            Var("bid"),
            Call("SqrtIter", (Var("bid"), Var("radicand"), Var("precision"))),
        ),
    )


def test_parse_minimal():
    program = parse_source("program { procedure main() {1} }")
    assert program == Program((ProcedureDecl("main", (), Num(1)),))


def test_parse_if_from_abs():
    program = parse_source("program { procedure f(x) { if lt?(x,0) then -(0,x) else x } }")
    assert program.procedures[0].body == If(
        Prim("lt?", Var("x"), Num(0)), Prim("-", Num(0), Var("x")), Var("x")
    )


def test_let_multiple_bindings():
    body = parse_source("program { procedure f() { let a = 1, b = a in b } }").procedures[0].body
    assert body == Let((Binding("a", Num(1)), Binding("b", Var("a"))), Var("b"))


def test_lt_without_paren_is_a_variable():
    body = parse_source("program { procedure f(x) { call g(lt?) } }").procedures[0].body
    assert body == Call("g", (Var("lt?"),))


@pytest.mark.parametrize(
    "source",
    [
        "program { procedure main() {1} } trailing",
        "program { procedure main() {1} } program { }",
        "program { procedure main() {} }",
        "program { procedure main() { +(1) } }",
        "program { procedure main() { +(1,2,3) } }",
        "program { procedure main() { let in 1 } }",
        "program { procedure main() { let x = 1 } }",
        "program { procedure main() { if 1 then 2 } }",
        "program { procedure main(x,) {1} }",
        "program { procedure if() {1} }",
        "program { procedure main() { f(1) } }",
        "program { procedure main() {1} ",
        "procedure main() {1}",
        "",
    ],
)
def test_parse_errors(source):
    with pytest.raises(SyntaxFailure) as exc:
        parse_source(source)
    assert exc.value.diagnostic.code == "UNEXPECTED_TOKEN"
    assert exc.value.diagnostic.severity == "error"


def test_parse_error_reports_expected_and_found():
    with pytest.raises(SyntaxFailure) as exc:
        parse_source("program {\n procedure main() { +(1) }\n}")
    diag = exc.value.diagnostic
    assert diag.span.start_line == 2
    assert "expected ','" in diag.message
    assert "found ')'" in diag.message


def test_parse_requires_eof_token():
    with pytest.raises(ValueError):
        parse([])


def test_expr_spans_within_procedure():
    program = parse_source(LISTING)
    for proc in program.procedures:
        for node in walk(proc.body):
            assert proc.span.contains(node.span)


def test_spans_point_at_source_text():
    program = parse_source(LISTING)
    improve = program.find("Improve")
    line = LISTING.splitlines()[improve.body.span.start_line - 1]
    s = improve.body.span
    assert line[s.start_col - 1 : s.end_col - 1] == "+(approximation,precision)"


# ---------------------------------------------------------------- printer


def test_pretty_minimal():
    text = pretty_print(Program((ProcedureDecl("main", (), Num(1)),)))
    assert "procedure main() {" in text
    assert "1" in text


def test_prim_prints_prefix():
    assert format_expr(Prim("+", Num(1), Num(2))) == "+(1,2)"


def test_pretty_roundtrip_listing():
    program = parse_source(LISTING)
    assert parse(tokenize(pretty_print(program))) == program


def test_pretty_print_is_stable():
    text = pretty_print(parse_source(LISTING))
    assert pretty_print(parse_source(text)) == text


@settings(max_examples=150)
@given(programs)
def test_roundtrip_generated(program):
    reparsed = parse_source(pretty_print(program))
    assert reparsed == program
    assert parse_source(pretty_print(reparsed)) == reparsed


@given(exprs)
def test_parsed_literals_in_range(expr):
    program = parse_source(pretty_print(Program((ProcedureDecl("f", (), expr),))))
    for node in walk(program.procedures[0].body):
        if isinstance(node, Num):
            assert 0 <= node.value <= INT64_MAX


@given(programs)
def test_parse_is_deterministic(program):
    text = pretty_print(program)
    assert tokenize(text) == tokenize(text)
    assert parse_source(text) == parse_source(text)


def test_dump_ast():
    text = dump_ast(parse_source(LISTING))
    lines = text.splitlines()
    assert lines[0] == "(program"
    assert len(lines) == 9
    assert lines[4] == "  (procedure Precision (x) (num 1))"
    assert lines[6] == "  (procedure Square (x) (prim * (var x) (var x)))"
    assert lines[8] == "  (procedure main () (call SQRT (num 5))))"
    assert "(let ((bid (call Improve (var approximation) (var radicand) (var precision))))" in text


def test_dump_ast_forms():
    program = parse_source("program { procedure f(a,b) { let x = 1, y = a in if lt?(x,y) then b else 0 } }")
    assert dump_ast(program) == (
        "(program\n"
        "  (procedure f (a b) (let ((x (num 1)) (y (var a))) "
        "(if (prim lt? (var x) (var y)) (var b) (num 0)))))\n"
    )
    assert dump_ast(Program(())) == "(program)\n"


def test_excessive_nesting_is_a_diagnostic():
    body = "+(1," * 5000 + "1" + ")" * 5000
    with pytest.raises(SyntaxFailure) as exc:
        parse_source("program { procedure main() {" + body + "} }")
    assert exc.value.diagnostic.code == "NESTING_TOO_DEEP"


@given(programs)
def test_spans_nest_in_generated_programs(program):
    parsed = parse_source(pretty_print(program))
    for proc in parsed.procedures:
        assert proc.span.contains(proc.body.span)
        for node in walk(proc.body):
            assert proc.span.contains(node.span)
            assert (node.span.start_line, node.span.start_col) <= (node.span.end_line, node.span.end_col)
