import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cutterm.parser import (
    ANY,
    GROUND,
    ParseError,
    QuerySpec,
    load_program,
    parse_goal,
    parse_program,
    parse_query,
    parse_term,
    print_program,
    query_directive,
)
from cutterm.terms import Clause, Cut, Program, Struct, Var
from support import CORPUS, entry


def test_clause_with_cut():
    p = parse_program("div(X,0,Z) :- !, failure(a).")
    c = p[1]
    assert c.index == 1
    assert c.head == parse_term("div(X,0,Z)")
    assert c.body == (Cut(), parse_term("failure(a)"))


def test_fact():
    c = parse_program("q.")[1]
    assert c.head == Struct("q") and c.body == ()


def test_cut_inside_term_rejected():
    with pytest.raises(ParseError, match="cut"):
        parse_program("p(f(!)).")


def test_parse_error_has_position():
    with pytest.raises(ParseError) as exc:
        parse_program("p(X) :- q(X)\nr.")
    assert exc.value.line >= 1


def test_query_modes():
    assert parse_query("div(g,g,v)") == QuerySpec("div", (GROUND, GROUND, ANY))
    assert parse_query("p(g)").ground_positions == (1,)
    assert parse_query("p(v)").ground_positions == ()
    assert parse_query("p").arity == 0


@pytest.mark.parametrize("text", ["div(g,x)", "div(g", "Div(g)"])
def test_bad_queries(text):
    with pytest.raises(ParseError):
        parse_query(text)


def test_query_directive():
    assert query_directive("% hi\n%query: p(g)\np.") == QuerySpec("p", (GROUND,))
    assert query_directive("p.") is None


def test_goal_parsing():
    assert parse_goal("") == []
    assert parse_goal("div(0,0,Z).") == [parse_term("div(0,0,Z)")]
    assert parse_goal("!, q") == [Cut(), Struct("q")]


def test_anonymous_variables_are_distinct():
    t = parse_term("f(_, _)")
    assert t.args[0] != t.args[1]


def test_round_trip_corpus():
    for e in CORPUS:
        text = print_program(e.program, e.query)
        again = parse_program(text)
        assert again == e.program
        assert query_directive(text) == e.query


def test_print_empty_and_single():
    assert print_program(Program(())) == ""
    assert print_program(parse_program("p(a).")) == "p(a).\n"


def test_load_program(tmp_path):
    f = tmp_path / "x.pl"
    f.write_text("%query: p(g)\np(s(X)) :- p(X).\n")
    prog, q = load_program(f)
    assert len(prog) == 1 and q == QuerySpec("p", (GROUND,))


def test_div_listing():
    p = entry("ex1_div").program
    assert len(p) == 8
    assert [c.has_cut for c in p] == [True, True] + [False] * 6
    assert str(p[3]) == "div(X, Y, s(Z)) :- sub(X, Y, U), div(U, Y, Z)."


# -- round trip property -------------------------------------------------------

_names = st.sampled_from(["a", "b", "f", "g", "s", "0", "foo"])
_vars = st.sampled_from([Var("X"), Var("Y"), Var("Zed")])


def _term():
    return st.recursive(
        st.one_of(_vars, st.builds(Struct, _names)),
        lambda sub: st.builds(Struct, _names, st.lists(sub, min_size=1, max_size=3)),
        max_leaves=6,
    )


def _clause():
    head = st.builds(Struct, st.sampled_from(["p", "q"]), st.lists(_term(), max_size=3))
    body_atom = st.one_of(
        st.just(Cut()), st.builds(Struct, st.sampled_from(["p", "q", "r"]), st.lists(_term(), max_size=2))
    )
    return st.tuples(head, st.lists(body_atom, max_size=3))


@settings(max_examples=150, deadline=None)
@given(st.lists(_clause(), max_size=4))
def test_print_parse_round_trip(raw):
    prog = Program(tuple(Clause(h, tuple(b), i) for i, (h, b) in enumerate(raw, 1)))
    assert parse_program(print_program(prog)) == prog
