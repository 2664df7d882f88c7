"""Shared helpers for the test suite."""

from __future__ import annotations

import re
from itertools import permutations

from cutterm.harness import load_corpus
from cutterm.parser import parse_program, parse_term
from cutterm.terms import Program, Struct, Var, apply, avar, term_vars, variant

CORPUS = load_corpus()


def entry(name):
    return CORPUS[name]


def program(name) -> Program:
    return CORPUS[name].program


DIV_TRANSFORMED = parse_program(
    """
    div_a(0, T4, 0).
    div_a(T5, T6, s(T9)) :- sub_d(T5, T6, T10), div_a(T10, T6, T9).
    div_a(T5, T6, s(T7)) :- sub_d(T5, T6, T8).
    sub_d(s(T9), s(T10), T11) :- sub_e(T9, T10, T11).
    sub_e(0, T12, 0).
    sub_e(T12, 0, T12).
    sub_e(s(T12), s(T13), T14) :- sub_e(T12, T13, T14).
    """
)


def _rename_preds(t, names):
    if isinstance(t, Struct) and t.functor in names:
        return Struct(names[t.functor], t.args)
    return t


def alpha_equivalent(p: Program, q: Program, renamable) -> bool:
    """Equal up to a bijection on the predicates in ``renamable`` and a variable renaming per clause.

    Clause order is ignored; each clause of ``p`` must pair with a distinct clause of ``q``.
    """
    if len(p) != len(q):
        return False
    mine = sorted({c.head.functor for c in p} & set(renamable))
    theirs = sorted({c.head.functor for c in q} & set(renamable))
    if len(mine) != len(theirs):
        return False
    for perm in permutations(theirs):
        names = dict(zip(mine, perm))
        left = [tuple(_rename_preds(t, names) for t in (c.head,) + c.body) for c in p]
        right = [(c.head,) + c.body for c in q]
        if _perfect_match(left, right):
            return True
    return False


def _perfect_match(left, right) -> bool:
    used = [False] * len(right)

    def go(i):
        if i == len(left):
            return True
        for j, r in enumerate(right):
            if not used[j] and variant(left[i], r):
                used[j] = True
                if go(i + 1):
                    return True
                used[j] = False
        return False

    return go(0)


def v(name, idx=0):
    return Var(name, False, idx)


_ABSTRACT = re.compile(r"^T(\d+)$")


def ab(text: str):
    """Parse a term whose variables ``T<k>`` are abstract; other variables stay concrete."""
    t = parse_term(text)
    ren = {}
    for w in term_vars(t):
        m = _ABSTRACT.match(w.name)
        if m:
            ren[w] = avar(int(m.group(1)))
    return apply(ren, t)


def ground_instance(sigma, t):
    """Instantiate ``t`` by ``sigma`` and send every remaining variable to 0."""
    s = apply(sigma, t)
    return apply({x: Struct("0") for x in term_vars(s)}, s)


# ---------------------------------------------------------------------------
# exhaustive unification oracle over {0/0, s/1, f/2, X, Y}

X, Y = v("X"), v("Y")
ZERO = Struct("0")


def terms_upto(depth, leaves):
    layer = list(leaves)
    for _ in range(depth):
        layer = list(leaves) + [Struct("s", (a,)) for a in layer] + [
            Struct("f", (a, b)) for a in layer for b in layer
        ]
    return layer


def unification_oracle_mismatches(unify_fn):
    """Compare ``unify_fn`` with a search over all ground unifiers of depth <= 2.

    Every pair of terms of depth <= 2 is tried (both orders).  A pair counts
    as unifiable iff some ground substitution for X, Y of depth <= 2 unifies
    it; that bound is complete for this term set since each binding of an
    mgu is a subterm of depth <= 1 over at most one other variable.  For
    unifiable pairs the returned mgu must also be a unifier and every oracle
    unifier must factor through it.  Returns the list of offending pairs.
    """
    terms = terms_upto(2, [ZERO, X, Y])
    ground = terms_upto(2, [ZERO])
    sigmas = [{X: a, Y: b} for a in ground for b in ground]
    images = [tuple(apply(s, t) for s in sigmas) for t in terms]
    bad = []
    for i, s in enumerate(terms):
        for j, t in enumerate(terms):
            unifiers = [k for k, (a, b) in enumerate(zip(images[i], images[j])) if a == b]
            mgu = unify_fn(s, t)
            if (mgu is None) != (not unifiers):
                bad.append((s, t, "unifiability"))
                continue
            if mgu is None:
                continue
            if apply(mgu, s) != apply(mgu, t):
                bad.append((s, t, "not a unifier"))
                continue
            for k in unifiers:
                theta = sigmas[k]
                if any(apply(theta, apply(mgu, w)) != apply(theta, w) for w in (X, Y)):
                    bad.append((s, t, f"{theta} does not factor"))
                    break
    return bad
