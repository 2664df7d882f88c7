"""
Abstract states and the abstract inference rules.

An abstract state pairs a backtracking sequence over abstract variables
with a knowledge base ``(G, U)``: ``G`` holds abstract variables that only
stand for ground terms, ``U`` holds pairs of terms that never unify under
any represented instantiation.  Every rule function returns its children
already normalized, each paired with the substitution shown on the edge.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .groundness import GroundnessTable, approx_gnd
from .interpreter import (
    BACKTRACK,
    CASE,
    CUT,
    EVAL,
    FAIL,
    SUC,
    Element,
    Goal,
    Labeled,
    Marker,
    State,
    format_state,
    state_marks,
    state_terms,
)
from .terms import (
    Clause,
    Cut,
    Program,
    Struct,
    Subst,
    Term,
    Var,
    VarSupply,
    apply,
    apply_all,
    is_ground,
    max_var_idx,
    relabel_cuts,
    rename_clause,
    restrict,
    term_vars,
    unifiable,
    unify,
    vars_in_order,
)

INSTANCE = "Instance"
PARALLEL = "Parallel"
SPLIT = "Split"

ALL_RULES = (SUC, FAIL, CUT, CASE, EVAL, BACKTRACK, INSTANCE, PARALLEL, SPLIT)

Pair = tuple[Term, Term]


class RuleNotApplicable(Exception):
    def __init__(self, rule: str, reason: str):
        super().__init__(f"{rule} not applicable: {reason}")
        self.rule = rule
        self.reason = reason


def _var_key(v: Var):
    return (v.idx, v.name, v.abstract)


def _fmt_vars(vs: Iterable[Var]) -> str:
    return "{" + ", ".join(str(v) for v in sorted(vs, key=_var_key)) + "}"


def _fmt_pairs(pairs: Iterable[Pair]) -> str:
    shown = sorted(f"({s}, {t})" for s, t in pairs)
    return "{" + ", ".join(shown) + "}"


@dataclass(frozen=True)
class KnowledgeBase:
    G: frozenset = frozenset()
    U: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "G", frozenset(self.G))
        object.__setattr__(self, "U", frozenset(tuple(p) for p in self.U))
        for v in self.G:
            if not (isinstance(v, Var) and v.abstract):
                raise ValueError(f"groundness set may only hold abstract variables, got {v}")
        for s, t in self.U:
            if isinstance(s, Cut) or isinstance(t, Cut):
                raise ValueError("cuts may not occur in non-unifiability pairs")

    def __str__(self):
        return f"({_fmt_vars(self.G)}, {_fmt_pairs(self.U)})"


@dataclass(frozen=True)
class AbstractState:
    state: State = ()
    kb: KnowledgeBase = field(default_factory=KnowledgeBase)

    @property
    def G(self) -> frozenset:
        return self.kb.G

    @property
    def U(self) -> frozenset:
        return self.kb.U

    @property
    def is_empty(self) -> bool:
        return not self.state

    def variables(self) -> list[Var]:
        """Variables of the sequence, left to right by first occurrence."""
        return vars_in_order(state_terms(self.state))

    def __str__(self):
        return f"{format_state(self.state)} ; {self.kb}"


def make_state(elements: Sequence[Element], G: Iterable[Var] = (), U: Iterable[Pair] = ()) -> AbstractState:
    return AbstractState(tuple(elements), KnowledgeBase(frozenset(G), frozenset(U)))


def root_state(predicate: str, arity: int, ground_positions: Iterable[int]) -> AbstractState:
    """``p(T1,...,Tn)`` with the listed 1-based positions known to be ground."""
    args = [Var("T", True, i) for i in range(1, arity + 1)]
    goal = Goal((Struct(predicate, args),))
    return AbstractState((goal,), KnowledgeBase(frozenset(args[i - 1] for i in ground_positions)))


# ---------------------------------------------------------------------------
# helpers on elements


def apply_element(sigma, e: Element) -> Element:
    if isinstance(e, Marker) or not sigma:
        return e
    if isinstance(e, Goal):
        return Goal(apply_all(sigma, e.atoms))
    return Labeled(apply_all(sigma, e.atoms), e.clause, e.mark)


def apply_state(sigma, state: Sequence[Element]) -> State:
    return tuple(apply_element(sigma, e) for e in state)


def _pair_vars(pairs: Iterable[Pair]) -> set[Var]:
    out: set[Var] = set()
    for s, t in pairs:
        out |= term_vars(s) | term_vars(t)
    return out


def _max_idx(a: AbstractState) -> int:
    terms = list(state_terms(a.state))
    for s, t in a.U:
        terms += [s, t]
    return max_var_idx(terms)


def _local_vars(pair: Pair, state_vars: set[Var]) -> set[Var]:
    """Concrete variables of a U pair that belong to the pair alone (clause-head variables)."""
    return {v for v in _pair_vars([pair]) if not v.abstract and v not in state_vars}


# ---------------------------------------------------------------------------
# normalization


def normalize(a: AbstractState) -> AbstractState:
    """Drop outer scope markers, shrink the knowledge base to what the state can still use."""
    st = list(a.state)
    while st and (isinstance(st[0], Marker) or isinstance(st[-1], Marker)):
        if isinstance(st[0], Marker):
            st.pop(0)
        else:
            st.pop()
    vs = {v for v in vars_in_order(state_terms(st))}
    G = frozenset(v for v in a.G if v in vs)
    U = frozenset(
        (s, t)
        for s, t in a.U
        if unifiable(s, t) and any(v.abstract and v in vs for v in term_vars(s) | term_vars(t))
    )
    return AbstractState(tuple(st), KnowledgeBase(G, U))


# ---------------------------------------------------------------------------
# active cuts / active marks


def active_cuts(state: Sequence[Element], program: Program) -> set[int]:
    out: set[int] = set()
    for e in state:
        if isinstance(e, Marker):
            continue
        out.update(t.mark for t in e.atoms if isinstance(t, Cut) and t.mark is not None)
        if isinstance(e, Labeled) and program[e.clause].has_cut:
            out.add(e.mark)
    return out


def active_marks(state: Sequence[Element]) -> set[int]:
    return {e.mark for j, e in enumerate(state) if isinstance(e, Marker) and 0 < j < len(state) - 1}


# ---------------------------------------------------------------------------
# the deterministic rules


def _first(a: AbstractState, rule: str):
    if not a.state:
        raise RuleNotApplicable(rule, "the state is empty")
    return a.state[0], a.state[1:]


def suc(a: AbstractState) -> list[tuple[AbstractState, Optional[Subst]]]:
    first, rest = _first(a, SUC)
    if not (isinstance(first, Goal) and not first.atoms):
        raise RuleNotApplicable(SUC, "the first element is not the empty goal")
    return [(normalize(AbstractState(rest, a.kb)), None)]


def fail(a: AbstractState) -> list[tuple[AbstractState, Optional[Subst]]]:
    first, rest = _first(a, FAIL)
    if not isinstance(first, Marker):
        raise RuleNotApplicable(FAIL, "the first element is not a scope marker")
    return [(normalize(AbstractState(rest, a.kb)), None)]


def cut(a: AbstractState) -> list[tuple[AbstractState, Optional[Subst]]]:
    first, rest = _first(a, CUT)
    if not (isinstance(first, Goal) and first.atoms and isinstance(first.atoms[0], Cut)):
        raise RuleNotApplicable(CUT, "the first goal does not start with a cut")
    m = first.atoms[0].mark
    head = Goal(first.atoms[1:])
    for j, e in enumerate(rest):
        if isinstance(e, Marker) and e.mark == m:
            return [(normalize(AbstractState((head,) + rest[j:], a.kb)), None)]
    return [(normalize(AbstractState((head,), a.kb)), None)]


def case(a: AbstractState, program: Program, supply: VarSupply) -> list[tuple[AbstractState, Optional[Subst]]]:
    first, rest = _first(a, CASE)
    if not (isinstance(first, Goal) and first.atoms and isinstance(first.atoms[0], Struct)):
        raise RuleNotApplicable(CASE, "the first goal does not start with an atom")
    marks = state_marks(a.state)
    m = supply.mark()
    while marks and m <= max(marks):
        m = supply.mark()
    alts = tuple(Labeled(first.atoms, c.index, m) for c in program.slice(first.atoms[0]))
    return [(normalize(AbstractState(alts + (Marker(m),) + rest, a.kb)), None)]


def _labeled_first(a: AbstractState, rule: str) -> tuple[Labeled, State, Struct]:
    first, rest = _first(a, rule)
    if not isinstance(first, Labeled):
        raise RuleNotApplicable(rule, "the first element is not a clause-labeled goal")
    t = first.atoms[0]
    if not isinstance(t, Struct):
        raise RuleNotApplicable(rule, "the selected atom is a variable")
    return first, rest, t


def eval_mgu(t: Struct, clause: Clause, supply: VarSupply, avoid: int) -> Optional[tuple[Subst, Clause]]:
    """mgu of ``t`` with a fresh copy of ``clause``'s head, renamed so every variable maps to fresh abstract ones.

    Returns ``(sigma, renamed_clause)``; ``sigma`` is defined on ``V(t)`` and
    the renamed clause's variables.  ``avoid`` is an index bound for the
    concrete copies.
    """
    ren = rename_clause(clause, VarSupply(next_var=avoid + 1))
    s0 = unify(t, ren.head)
    if s0 is None:
        return None
    order = vars_in_order([apply(s0, t)] + list(apply_all(s0, ren.body)))
    rho = {v: supply.var() for v in order}
    dom = term_vars(t) | set(ren.variables())
    sigma = Subst({x: apply(rho, apply(s0, x)) for x in dom})
    return sigma, ren


def applicable_backtrack(a: AbstractState, program: Program) -> bool:
    """Sound test that no represented instance of the selected atom unifies with the clause head."""
    first, _, t = _labeled_first(a, BACKTRACK)
    clause = program[first.clause]
    top = _max_idx(a)
    # throwaway names: the probe must not consume the caller's fresh variables
    r = eval_mgu(t, clause, VarSupply(next_var=top + 1), top)
    if r is None:
        return True
    sigma, _ = r
    svars = set(a.variables())
    for pair in a.U:
        local = _local_vars(pair, svars)
        s, s2 = apply(sigma, pair[0]), apply(sigma, pair[1])
        if unify(s, s2, bindable=lambda v, local=local: v in local) is not None:
            return True
    return False


def backtrack(a: AbstractState, program: Program) -> list[tuple[AbstractState, Optional[Subst]]]:
    _, rest, _ = _labeled_first(a, BACKTRACK)
    if not applicable_backtrack(a, program):
        raise RuleNotApplicable(BACKTRACK, "some represented instance may unify with the clause head")
    return [(normalize(AbstractState(rest, a.kb)), None)]


def eval_rule(a: AbstractState, program: Program, supply: VarSupply) -> list[tuple[AbstractState, Optional[Subst]]]:
    """Two children: the clause applied (edge labeled by the mgu on the atom) and the clause skipped."""
    first, rest, t = _labeled_first(a, EVAL)
    clause = program[first.clause]
    r = eval_mgu(t, clause, supply, _max_idx(a) + supply.next_var)
    if r is None:
        raise RuleNotApplicable(EVAL, f"{t} does not unify with the head of clause {clause.index}")
    sigma, ren = r
    sigma_g = restrict(sigma, a.G)
    goal = Goal(apply_all(sigma, relabel_cuts(ren.body, first.mark) + first.atoms[1:]))
    new_g = {v for x in sigma_g.range_terms() for v in term_vars(x) if v.abstract}
    new_g |= {v for v in a.G if v not in sigma_g}
    new_u = {(apply(sigma_g, s), apply(sigma_g, s2)) for s, s2 in a.U}
    left = AbstractState((goal,) + apply_state(sigma_g, rest), KnowledgeBase(frozenset(new_g), frozenset(new_u)))
    right = AbstractState(rest, KnowledgeBase(a.G, a.U | {(t, clause.head)}))
    return [(normalize(left), restrict(sigma, term_vars(t))), (normalize(right), None)]


# ---------------------------------------------------------------------------
# Parallel and Split


def parallel(a: AbstractState, k: int, program: Program) -> list[tuple[AbstractState, Optional[Subst]]]:
    """Split the sequence before position ``k`` (0-based)."""
    if not 0 < k < len(a.state):
        raise RuleNotApplicable(PARALLEL, f"split point {k} must leave both parts non-empty")
    s1, s2 = a.state[:k], a.state[k:]
    clash = active_cuts(s1, program) & active_marks(s2)
    if clash:
        raise RuleNotApplicable(
            PARALLEL, f"active cuts of the first part meet active marks of the second: {sorted(clash)}"
        )
    return [(normalize(AbstractState(s1, a.kb)), None), (normalize(AbstractState(s2, a.kb)), None)]


def split_subst(a: AbstractState, supply: VarSupply) -> Subst:
    """Fresh abstract names for every non-ground variable of the state, then of ``U``."""
    in_state = [v for v in a.variables() if v not in a.G]
    in_u = [v for v in _pair_vars(a.U) if v.abstract and v not in a.G and v not in set(in_state)]
    order = sorted(in_state, key=_var_key) + sorted(in_u, key=_var_key)
    return Subst({v: supply.var() for v in order})


def split(
    a: AbstractState, table: GroundnessTable, supply: VarSupply
) -> list[tuple[AbstractState, Optional[Subst]]]:
    if len(a.state) != 1 or not isinstance(a.state[0], Goal):
        raise RuleNotApplicable(SPLIT, "the state must be a single plain goal")
    atoms = a.state[0].atoms
    if len(atoms) < 2:
        raise RuleNotApplicable(SPLIT, "the goal needs at least two atoms")
    t, q = atoms[0], atoms[1:]
    if not isinstance(t, Struct):
        raise RuleNotApplicable(SPLIT, "the first atom must be a proper atom")
    mu = split_subst(a, supply)
    g2 = set(a.G) | approx_gnd(t, mu, a.G, table)
    u2 = {(apply(mu, s), apply(mu, s2)) for s, s2 in a.U}
    left = AbstractState((Goal((t,)),), a.kb)
    right = AbstractState((Goal(apply_all(mu, q)),), KnowledgeBase(frozenset(g2), frozenset(u2)))
    return [(normalize(left), None), (normalize(right), mu)]


# ---------------------------------------------------------------------------
# Instance


def _match(p: Term, t: Term, mu: dict, pattern_var, local: Optional[tuple[dict, dict, set]] = None) -> bool:
    """Extend ``mu`` so that ``p mu == t``; ``local`` carries a bijection for pair-local variables."""
    stack = [(p, t)]
    while stack:
        x, y = stack.pop()
        if isinstance(x, Var) and local is not None and x in local[2]:
            fwd, bwd, _ = local
            if not isinstance(y, Var) or y.abstract:
                return False
            if fwd.setdefault(x, y) != y or bwd.setdefault(y, x) != x:
                return False
        elif isinstance(x, Var) and pattern_var(x):
            bound = mu.get(x)
            if bound is None:
                mu[x] = y
            elif bound != y:
                return False
        elif isinstance(x, Struct):
            if not (isinstance(y, Struct) and y.key == x.key):
                return False
            stack.extend(zip(x.args, y.args))
        elif x != y:
            return False
    return True


def _match_state(general: State, special: State) -> Optional[dict]:
    if len(general) != len(special):
        return None
    mu: dict = {}
    always = lambda v: True  # noqa: E731
    for g, s in zip(general, special):
        if type(g) is not type(s):
            return None
        if isinstance(g, Marker):
            if g.mark != s.mark:
                return None
            continue
        if isinstance(g, Labeled) and (g.clause != s.clause or g.mark != s.mark):
            return None
        if len(g.atoms) != len(s.atoms):
            return None
        for x, y in zip(g.atoms, s.atoms):
            if isinstance(x, Cut) or isinstance(y, Cut):
                if x != y:
                    return None
            elif not _match(x, y, mu, always):
                return None
    return mu


def _match_pairs(pairs: list[Pair], target: frozenset, mu: dict, g_vars: set, s_vars: set) -> Optional[dict]:
    """Backtracking search mapping every pair into ``target`` (either orientation)."""
    if not pairs:
        return mu
    (p, p2), rest = pairs[0], pairs[1:]
    local_vars = _local_vars((p, p2), g_vars)
    free = lambda v: v.abstract or v in g_vars  # noqa: E731
    for u, u2 in sorted(target, key=str):
        for x, y in ((u, u2), (u2, u)):
            cand = dict(mu)
            loc = ({}, {}, local_vars)
            if not _match(p, x, cand, free, loc) or not _match(p2, y, cand, free, loc):
                continue
            # local variables must land on variables private to the target pair
            if any(v in s_vars for v in loc[1]):
                continue
            done = _match_pairs(rest, target, cand, g_vars, s_vars)
            if done is not None:
                return done
    return None


def instance_subst(a: AbstractState, b: AbstractState) -> Optional[Subst]:
    """``mu`` showing that every instance represented by ``a`` is represented by ``b``."""
    if not a.state:
        return None
    mu = _match_state(b.state, a.state)
    if mu is None:
        return None
    concrete = [v for v in mu if not v.abstract]
    images = [mu[v] for v in concrete]
    if any(not isinstance(x, Var) or x.abstract for x in images) or len(set(images)) != len(images):
        return None
    for v in b.G:
        if v not in mu or not term_vars(mu[v]) <= a.G:
            return None
    b_vars = set(b.variables())
    a_vars = set(a.variables())
    mu2 = _match_pairs(sorted(b.U, key=str), a.U, mu, b_vars, a_vars)
    if mu2 is None:
        return None
    return Subst(mu2)


def find_instance(
    a: AbstractState, candidates: Iterable[AbstractState]
) -> Optional[tuple[AbstractState, Subst]]:
    for c in candidates:
        if c is a:
            continue
        mu = instance_subst(a, c)
        if mu is not None:
            return c, mu
    return None


def instance(a: AbstractState, target: AbstractState) -> list[tuple[AbstractState, Optional[Subst]]]:
    mu = instance_subst(a, target)
    if mu is None:
        raise RuleNotApplicable(INSTANCE, "the state is not an instance of the target")
    return [(target, mu)]


# ---------------------------------------------------------------------------
# concretizations


def _fresh_constant(v: Var) -> Struct:
    return Struct(f"$c{v.idx}")


def _rename_locals(pair: Pair, local: set[Var], base: int) -> Pair:
    ren = {v: Var("_U", False, base + i) for i, v in enumerate(sorted(local, key=_var_key))}
    return apply(ren, pair[0]), apply(ren, pair[1])


def is_concretization(gamma, a: AbstractState) -> bool:
    """The four conditions on ``gamma`` for ``a``'s knowledge base."""
    svars = set(a.variables())
    for v in svars:
        if v.abstract and v not in gamma:
            return False
    for v, t in gamma.items():
        if any(w.abstract for w in term_vars(t)):
            return False
    for v in a.G:
        if not is_ground(gamma.get(v, v)):
            return False
    full = dict(gamma)
    for v in _pair_vars(a.U):
        if v.abstract and v not in full:
            full[v] = _fresh_constant(v)
    base = max_var_idx(list(full.values()) + state_terms(a.state)) + 1000
    for pair in a.U:
        s, s2 = _rename_locals(pair, _local_vars(pair, svars), base)
        if unifiable(apply(full, s), apply(full, s2)):
            return False
    return True


def concretize(a: AbstractState, gamma) -> State:
    return apply_state(gamma, a.state)


def represents(a: AbstractState, concrete: Sequence[Element]) -> Optional[Subst]:
    """The concretization mapping ``a`` onto ``concrete``, if ``concrete`` is in Con(a)."""
    if len(concrete) != len(a.state):
        return None
    gamma: dict = {}
    for g, s in zip(a.state, concrete):
        if type(g) is not type(s):
            return None
        if isinstance(g, Marker):
            if g.mark != s.mark:
                return None
            continue
        if isinstance(g, Labeled) and (g.clause != s.clause or g.mark != s.mark):
            return None
        if len(g.atoms) != len(s.atoms):
            return None
        for x, y in zip(g.atoms, s.atoms):
            if isinstance(x, Cut) or isinstance(y, Cut):
                if x != y:
                    return None
            elif not _match(x, y, gamma, lambda v: v.abstract):
                return None
    if not is_concretization(gamma, a):
        return None
    return Subst(gamma)


def signature_of(program: Program) -> list[tuple[str, int]]:
    """Function symbols occurring in argument positions of the program, sorted."""
    out: set[tuple[str, int]] = set()

    def walk(t):
        if isinstance(t, Struct):
            out.add(t.key)
            for x in t.args:
                walk(x)

    for c in program:
        for t in (c.head,) + tuple(c.body):
            if isinstance(t, Struct):
                for x in t.args:
                    walk(x)
    return sorted(out)


def random_term(rng: random.Random, functions, depth: int, ground: bool, pool: Sequence[Var]) -> Term:
    constants = [f for f in functions if f[1] == 0]
    compound = [f for f in functions if f[1] > 0]
    choices = []
    if depth > 0 and compound:
        choices.append("compound")
    choices.append("constant")
    if not ground and pool:
        choices.append("var")
    kind = rng.choice(choices)
    if kind == "var":
        return rng.choice(list(pool))
    if kind == "constant":
        name, _ = rng.choice(constants)
        return Struct(name)
    name, n = rng.choice(compound)
    return Struct(name, [random_term(rng, functions, depth - 1, ground, pool) for _ in range(n)])


def sample_concretizations(
    a: AbstractState,
    fuel: int,
    functions: Optional[Sequence[tuple[str, int]]] = None,
    rng: Optional[random.Random] = None,
    depth: int = 3,
    attempts: int = 50,
) -> list[Subst]:
    """Up to ``fuel`` distinct concretizations of ``a`` drawn at random and filtered.

    ``functions`` is the signature to draw from; a fresh constant ``c`` is
    always added.  Without an explicit ``rng`` the draw is seeded by ``fuel``.
    """
    rng = rng or random.Random(fuel)
    sig = sorted(set(functions or ()) | {("c", 0)})
    avars = [v for v in a.variables() if v.abstract]
    pool = [Var("X", False, i) for i in range(1, 3)]
    out: list[Subst] = []
    seen: set = set()
    for _ in range(fuel * attempts):
        if len(out) >= fuel:
            break
        gamma = Subst({v: random_term(rng, sig, rng.randint(0, depth), v in a.G, pool) for v in avars})
        if gamma in seen:
            continue
        seen.add(gamma)
        if is_concretization(gamma, a):
            out.append(gamma)
    return out


__all__ = [
    "INSTANCE",
    "PARALLEL",
    "SPLIT",
    "ALL_RULES",
    "RuleNotApplicable",
    "KnowledgeBase",
    "AbstractState",
    "make_state",
    "root_state",
    "apply_element",
    "apply_state",
    "normalize",
    "active_cuts",
    "active_marks",
    "suc",
    "fail",
    "cut",
    "case",
    "eval_mgu",
    "applicable_backtrack",
    "backtrack",
    "eval_rule",
    "parallel",
    "split_subst",
    "split",
    "instance_subst",
    "find_instance",
    "instance",
    "is_concretization",
    "concretize",
    "represents",
    "signature_of",
    "random_term",
    "sample_concretizations",
]
