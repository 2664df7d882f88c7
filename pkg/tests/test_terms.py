from hypothesis import given, settings
from hypothesis import strategies as st

from cutterm.parser import parse_term
from cutterm.terms import (
    IDENTITY,
    Cut,
    Struct,
    Subst,
    Var,
    VarSupply,
    apply,
    avar,
    compose,
    is_idempotent,
    match,
    relabel_cuts,
    rename_clause,
    restrict,
    unify,
    variant,
)
from support import X, Y, ZERO, program, unification_oracle_mismatches, v

T = parse_term


# -- unify ------------------------------------------------------------------


def test_unify_single_binding():
    assert unify(v("X"), ZERO) == Subst({v("X"): ZERO})


def test_unify_eval_step_is_renaming_on_goal():
    goal = T("div(0,0,Z)")
    sigma = unify(goal, T("div(X,0,Z1)"))
    assert sigma is not None
    assert restrict(sigma, {v("Z")}).is_renaming()


def test_unify_occurs_check():
    assert unify(T("f(X,X)"), T("f(Y,s(Y))")) is None


def test_unify_binds_right_variable_first():
    assert unify(v("X"), v("Y")) == Subst({v("Y"): v("X")})


def test_unify_bindable_restriction():
    assert unify(v("X"), ZERO, bindable=lambda w: False) is None
    assert unify(v("X"), v("Y"), bindable=lambda w: w == v("X")) == Subst({v("X"): v("Y")})


def test_exhaustive_unification_oracle():
    assert unification_oracle_mismatches(unify) == []


def test_oracle_notices_missing_occurs_check():
    def sloppy(s, t):
        if isinstance(s, Var) and s != t:
            return Subst({s: t})
        return unify(s, t)

    assert unification_oracle_mismatches(sloppy)


# -- substitutions ----------------------------------------------------------


def test_apply():
    assert apply({v("X"): ZERO}, T("s(X)")) == T("s(0)")
    assert apply({avar(1): Struct("s", (avar(2),))}, Struct("p", (avar(1),))) == Struct("p", (Struct("s", (avar(2),)),))
    t = T("f(X, g(Y))")
    assert apply(IDENTITY, t) is t or apply(IDENTITY, t) == t


def test_apply_keeps_cut_marks():
    assert apply({v("X"): ZERO}, Cut(3)) == Cut(3)


def test_compose_reference_facts():
    p1 = Struct("p", (avar(1),))
    s1 = compose({avar(1): Struct("f", (avar(2),))}, {avar(2): Struct("a")})
    assert apply(s1, p1) == T("p(f(a))")
    s2 = compose({avar(1): Struct("g", (avar(3),))}, {avar(3): Struct("b")})
    assert apply(s2, p1) == T("p(g(b))")


def test_compose_identity():
    s = Subst({v("X"): ZERO})
    assert compose(IDENTITY, s) == s
    assert compose(s, IDENTITY) == s


def test_subst_drops_identity_bindings():
    assert Subst({v("X"): v("X")}) == IDENTITY


def test_restrict():
    assert restrict({v("X"): ZERO, v("Y"): T("s(0)")}, {v("X")}) == Subst({v("X"): ZERO})
    assert restrict({v("X"): ZERO}, set()) == IDENTITY
    sigma = {avar(1): Struct("s", (avar(2),)), v("X"): avar(2)}
    assert restrict(sigma, {avar(1)}) == Subst({avar(1): Struct("s", (avar(2),))})


def test_relabel_cuts():
    assert relabel_cuts([Cut(), T("failure(a)")], 1) == (Cut(1), T("failure(a)"))
    assert relabel_cuts([], 5) == ()
    assert relabel_cuts([T("q")], 3) == (T("q"),)


def test_slice_selects_by_predicate():
    p = program("ex1_div")
    assert [c.index for c in p.slice(T("div(0,0,Z)"))] == [1, 2, 3]
    assert [c.index for c in p.slice(T("failure(a)"))] == [4]
    assert p.slice(T("nothing(a)")) == []


def test_rename_clause_is_fresh_variant():
    c = program("ex1_div")[3]
    r = rename_clause(c, VarSupply(next_var=100))
    assert variant((c.head,) + c.body, (r.head,) + r.body)
    assert not set(c.variables()) & set(r.variables())


def test_match_one_sided():
    assert match(T("f(X,Y)"), T("f(0,s(0))")) == {v("X"): ZERO, v("Y"): T("s(0)")}
    assert match(T("f(X,X)"), T("f(0,s(0))")) is None


def test_variant():
    assert variant([T("f(X,Y)")], [T("f(Y,X)")])
    assert not variant([T("f(X,X)")], [T("f(X,Y)")])


# -- properties ---------------------------------------------------------------

VARS = [X, Y, v("Z")]


def _terms():
    leaves = st.sampled_from([ZERO, Struct("a")] + VARS)
    return st.recursive(
        leaves,
        lambda sub: st.one_of(
            st.builds(lambda a: Struct("s", (a,)), sub),
            st.builds(lambda a, b: Struct("f", (a, b)), sub, sub),
        ),
        max_leaves=8,
    )


@settings(max_examples=300, deadline=None)
@given(_terms(), _terms())
def test_unify_sound_and_idempotent(s, t):
    sigma = unify(s, t)
    if sigma is not None:
        assert apply(sigma, s) == apply(sigma, t)
        assert is_idempotent(sigma)


@settings(max_examples=300, deadline=None)
@given(_terms(), _terms(), st.dictionaries(st.sampled_from(VARS), _terms(), max_size=3))
def test_unify_most_general(s, t, theta):
    # any unifier theta factors through the mgu: theta = sigma theta
    if apply(theta, s) != apply(theta, t):
        return
    sigma = unify(s, t)
    assert sigma is not None
    for w in VARS:
        assert apply(theta, apply(sigma, w)) == apply(theta, w)


@settings(max_examples=200, deadline=None)
@given(
    st.dictionaries(st.sampled_from(VARS), _terms(), max_size=3),
    st.dictionaries(st.sampled_from(VARS), _terms(), max_size=3),
    _terms(),
)
def test_compose_law(s, t, x):
    assert apply(compose(s, t), x) == apply(t, apply(s, x))
