"""Property test: pretty-print is a right inverse of parse on random ASTs.

Programs are generated structurally (not as text), so the printer has to
get precedence, associativity, and statement layout right for arbitrary
nesting, not just for the shapes the fixtures happen to use.
"""

from __future__ import annotations

from hypothesis import given, settings
from hypothesis import strategies as st

from hallab.runtime import parse, pretty_print
from hallab.runtime.ast_nodes import (Assign, BinOp, Call, ExprStmt, For, If,
                                      Index, ListLit, Literal, MapLit, Name,
                                      Program, UnaryOp, While)

_IDENTS = st.sampled_from(["x", "y", "resp", "f_list", "total_2", "k"])
_KEYS = st.sampled_from(["a", "f_start", "s21_re", "data file", "columns"])
_CALLEES = st.sampled_from(["len", "str", "abs", "min", "vna_sweep", "invoke"])

_NUMBERS = st.one_of(
    st.integers(min_value=0, max_value=9999).map(float),
    st.floats(min_value=0.0, max_value=1e12, allow_nan=False,
              allow_infinity=False),
)

_LITERALS = st.one_of(
    st.none(),
    st.booleans(),
    _NUMBERS,
    st.text(alphabet="ab c_1\"\\\n\t", max_size=6),
).map(Literal)

_CMP = st.sampled_from(["==", "!=", "<", "<=", ">", ">="])
_ARITH = st.sampled_from(["+", "-", "*", "/", "%"])
_BOOL = st.sampled_from(["and", "or"])


def _exprs(depth: int):
    base = st.one_of(_LITERALS, _IDENTS.map(Name),
                     st.just(Name("STATE")))
    if depth <= 0:
        return base
    sub = _exprs(depth - 1)
    return st.one_of(
        base,
        st.lists(sub, max_size=3).map(ListLit),
        st.lists(st.tuples(_KEYS, sub), max_size=3).map(
            lambda pairs: MapLit(list(pairs))),
        st.tuples(sub, sub).map(lambda t: Index(t[0], t[1])),
        st.tuples(_CALLEES, st.lists(sub, max_size=3)).map(
            lambda t: Call(Name(t[0]), list(t[1]))),
        st.tuples(st.sampled_from(["-", "not"]), sub).map(
            lambda t: UnaryOp(t[0], t[1])),
        st.tuples(st.one_of(_CMP, _ARITH, _BOOL), sub, sub).map(
            lambda t: BinOp(t[0], t[1], t[2])),
    )


def _targets():
    return st.one_of(
        _IDENTS.map(Name),
        st.tuples(_exprs(1), _exprs(1)).map(lambda t: Index(t[0], t[1])),
    )


def _stmts(depth: int):
    expr = _exprs(2)
    simple = st.one_of(
        st.tuples(_targets(), expr).map(lambda t: Assign(t[0], t[1])),
        expr.map(ExprStmt),
    )
    if depth <= 0:
        return simple
    block = st.lists(_stmts(depth - 1), min_size=1, max_size=3)
    return st.one_of(
        simple,
        st.tuples(st.lists(st.tuples(expr, block), min_size=1, max_size=3),
                  st.one_of(st.none(), block)).map(
            lambda t: If(list(t[0]), t[1])),
        st.tuples(expr, block).map(lambda t: While(t[0], t[1])),
        st.tuples(_IDENTS, expr, block).map(
            lambda t: For(t[0], t[1], t[2])),
    )


_PROGRAMS = st.lists(_stmts(2), min_size=1, max_size=6).map(
    lambda body: Program(body))


@settings(max_examples=300, deadline=None)
@given(_PROGRAMS)
def test_pretty_print_parse_identity(program):
    printed = pretty_print(program)
    reparsed = parse(printed)
    assert reparsed == program
    # And printing is idempotent from there on.
    assert pretty_print(reparsed) == printed
