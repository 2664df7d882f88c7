import random
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cutterm.abstract import random_term, signature_of
from cutterm.groundness import analyze, approx_gnd
from cutterm.interpreter import run
from cutterm.parser import parse_program, parse_term
from cutterm.terms import Struct, Var, apply, avar, is_ground
from support import CORPUS, program


def test_sub_with_two_ground_inputs():
    tbl = analyze(program("ex1_div"))
    assert tbl.ground("sub", {1, 2}, 3) == {1, 2, 3}


def test_eq_propagates():
    tbl = analyze(program("ex1_div"))
    assert tbl.ground("eq", {1}, 2) >= {1, 2}


def test_never_succeeding_predicate_reports_everything():
    tbl = analyze(program("ex3_peano"))
    assert not tbl.succeeds(("p", 1), set())
    assert tbl.ground("p", set(), 1) == {1}


def test_no_information_without_inputs():
    tbl = analyze(program("ex4_peano_fact"))
    assert tbl.ground("p", set(), 1) == frozenset()


def test_identity_row_for_unknown_predicate():
    tbl = analyze(parse_program("p(X, Y)."))
    assert tbl.ground("p", {1}, 2) == {1}
    assert tbl.ground("unknown", {1}, 2) == {1, 2}


def test_lookup_needs_arity():
    with pytest.raises(ValueError):
        analyze(program("ex1_div")).ground("sub", {1})


def test_approx_gnd_split_of_div():
    tbl = analyze(program("ex1_div"))
    t5, t6, t7, t8, t9, t10 = (avar(i) for i in (5, 6, 7, 8, 9, 10))
    mu = {t7: t9, t8: t10}
    assert approx_gnd(Struct("sub", (t5, t6, t8)), mu, {t5, t6}, tbl) == {t5, t6, t10}


def test_approx_gnd_without_ground_inputs():
    tbl = analyze(program("ex1_div"))
    t1, t2 = avar(1), avar(2)
    assert approx_gnd(Struct("sub", (t1, t2, t2)), {}, set(), tbl) == set()
    assert approx_gnd(t1, {}, {t1}, tbl) == set()


def _rows(prog):
    for key in prog.predicates():
        n = key[1]
        for k in range(n + 1):
            for inp in combinations(range(1, n + 1), k):
                yield key, frozenset(inp)


@pytest.mark.parametrize("name", [e.name for e in CORPUS])
def test_monotone_and_extensive(name):
    tbl = analyze(program(name))
    for key, inp in _rows(program(name)):
        out = tbl.ground(key, inp)
        assert inp <= out
        for extra in range(1, key[1] + 1):
            assert out <= tbl.ground(key, inp | {extra})


@pytest.mark.parametrize("name", [e.name for e in CORPUS])
def test_sound_on_sampled_queries(name):
    # every answer of a query ground at I is ground at all reported positions
    prog = program(name)
    tbl = analyze(prog)
    sig = sorted(set(signature_of(prog)) | {("c", 0)})
    pool = [Var("X", False, 1), Var("X", False, 2)]
    rng = random.Random(7)
    for key, inp in _rows(prog):
        for _ in range(15):
            args = [random_term(rng, sig, rng.randint(0, 3), i in inp, pool) for i in range(1, key[1] + 1)]
            r = run([Struct(key[0], args)], prog, 300)
            for ans in r.answers:
                for j in tbl.ground(key, inp):
                    assert is_ground(apply(ans, args[j - 1])), (key, inp, args, ans)


_arg = st.sampled_from(["a", "b", "X", "Y", "f(X)", "f(a)"])
_fact = st.tuples(_arg, _arg).map(lambda ab: f"q({ab[0]}, {ab[1]}).")


@settings(max_examples=40, deadline=None)
@given(st.lists(_fact, min_size=1, max_size=4))
def test_sound_on_random_fact_sets(facts):
    prog = parse_program(" ".join(facts) + " p(X, Y) :- q(X, Z), q(Z, Y).")
    tbl = analyze(prog)
    queries = ["a", "b", "f(a)", "W", "f(W)"]
    for pred in ("p", "q"):
        for x in queries:
            for y in queries:
                args = [parse_term(x), parse_term(y)]
                inp = {i for i, t in enumerate(args, 1) if is_ground(t)}
                for ans in run([Struct(pred, args)], prog, 500).answers:
                    for j in tbl.ground(pred, inp, 2):
                        assert is_ground(apply(ans, args[j - 1]))
