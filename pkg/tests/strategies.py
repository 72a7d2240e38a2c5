"""Hypothesis strategies for well-formed ASTs."""

from hypothesis import strategies as st

from miniproc.syntax import (
    INT64_MAX,
    RESERVED,
    Binding,
    Call,
    If,
    Let,
    Num,
    Param,
    Prim,
    ProcedureDecl,
    Program,
    Var,
)

names = st.from_regex(r"[A-Za-z][A-Za-z0-9]{0,5}\??", fullmatch=True).filter(
    lambda s: s not in RESERVED
)
numbers = st.one_of(st.integers(0, 20), st.integers(0, INT64_MAX))
ops = st.sampled_from(["+", "-", "*", "lt?"])


def _compound(sub):
    return st.one_of(
        st.builds(Call, names, st.lists(sub, max_size=3).map(tuple)),
        st.builds(Prim, ops, sub, sub),
        st.builds(
            Let,
            st.lists(st.builds(Binding, names, sub), min_size=1, max_size=3).map(tuple),
            sub,
        ),
        st.builds(If, sub, sub, sub),
    )


exprs = st.recursive(st.one_of(st.builds(Num, numbers), st.builds(Var, names)), _compound, max_leaves=12)

procedures = st.builds(
    ProcedureDecl,
    names,
    st.lists(st.builds(Param, names), max_size=3).map(tuple),
    exprs,
)

programs = st.builds(Program, st.lists(procedures, max_size=4).map(tuple))


# Fixed signatures main(), f(a), g(a, b) and a small variable pool make
# many generated programs statically clean.
_small_vars = st.sampled_from(["a", "b", "c"])
_SIGNATURES = {"main": (), "f": ("a",), "g": ("a", "b")}


def _small_compound(sub):
    calls = [
        st.tuples(*[sub] * len(params)).map(lambda args, n=name: Call(n, args))
        for name, params in _SIGNATURES.items()
    ]
    return st.one_of(
        *calls,
        st.builds(Prim, ops, sub, sub),
        st.builds(Let, st.lists(st.builds(Binding, _small_vars, sub), min_size=1, max_size=2).map(tuple), sub),
        st.builds(If, sub, sub, sub),
    )


small_exprs = st.recursive(
    st.one_of(st.builds(Num, st.integers(0, 10)), st.builds(Var, _small_vars)),
    _small_compound,
    max_leaves=8,
)


@st.composite
def small_programs(draw):
    procs = [
        ProcedureDecl(name, tuple(Param(p) for p in params), draw(small_exprs))
        for name, params in _SIGNATURES.items()
    ]
    return Program(tuple(procs))
