"""
Reference interpreter for logic programs with cut.

A state is a tuple of elements: plain goals, clause-labeled goals
``(t,Q)^i_m`` and scope markers ``?_m``.  Seven rules (Suc, Fail, two Cut
rules, Case, Eval, Backtrack) rewrite the state; at most one applies.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence, Union

from .terms import (
    Cut,
    Program,
    Struct,
    Subst,
    Term,
    Var,
    VarSupply,
    apply_all,
    max_var_idx,
    relabel_cuts,
    rename_clause,
    restrict,
    strip_cut_marks,
    term_vars,
    unify,
    variant,
    vars_in_order,
)

SUC = "Suc"
FAIL = "Fail"
CUT = "Cut"
CASE = "Case"
EVAL = "Eval"
BACKTRACK = "Backtrack"

CONCRETE_RULES = (SUC, FAIL, CUT, CASE, EVAL, BACKTRACK)


@dataclass(frozen=True)
class Goal:
    """A goal ``t1, ..., tn``; the empty tuple is the empty goal."""

    atoms: tuple[Term, ...] = ()
    # instantiation of the query variables along this branch; not part of the state
    answer: tuple[Term, ...] = field(default=(), compare=False, repr=False)

    def __str__(self):
        return format_goal(self.atoms)


@dataclass(frozen=True)
class Labeled:
    """``(t, Q)^clause_mark``: apply clause number ``clause`` to ``t`` next."""

    atoms: tuple[Term, ...]
    clause: int
    mark: int
    answer: tuple[Term, ...] = field(default=(), compare=False, repr=False)

    def __str__(self):
        body = str(self.atoms[0]) if len(self.atoms) == 1 else f"({format_goal(self.atoms)})"
        return f"{body}^{self.clause}_{self.mark}"


@dataclass(frozen=True)
class Marker:
    """``?_m``: end of the scope of cuts labeled ``m``."""

    mark: int

    def __str__(self):
        return f"?_{self.mark}"


Element = Union[Goal, Labeled, Marker]
State = tuple  # tuple[Element, ...]


def format_goal(atoms: Sequence[Term]) -> str:
    return ", ".join(map(str, atoms)) if atoms else "□"


def format_state(state: Sequence[Element]) -> str:
    return " | ".join(map(str, state)) if state else "ε"


def state_terms(state: Sequence[Element]) -> list[Term]:
    out: list[Term] = []
    for e in state:
        if not isinstance(e, Marker):
            out.extend(e.atoms)
    return out


def state_marks(state: Sequence[Element]) -> set[int]:
    marks = set()
    for e in state:
        if isinstance(e, Marker):
            marks.add(e.mark)
        else:
            if isinstance(e, Labeled):
                marks.add(e.mark)
            marks.update(t.mark for t in e.atoms if isinstance(t, Cut) and t.mark is not None)
    return marks


def state_vars(state: Sequence[Element]) -> list[Var]:
    return vars_in_order(state_terms(state))


def strip_labels(e: Element) -> Optional[tuple[Term, ...]]:
    """The goal of an element with clause labels and cut marks removed."""
    if isinstance(e, Marker):
        return None
    return strip_cut_marks(e.atoms)


class Step(NamedTuple):
    rule: str
    state: State
    subst: Optional[Subst]
    next_mark: int


def initial_state(query: Sequence[Term]) -> State:
    """The one-goal state for ``query``, with its cuts labeled 1."""
    atoms = relabel_cuts(query, 1)
    return (Goal(tuple(atoms), tuple(vars_in_order(query))),)


def first_free_mark(query: Sequence[Term]) -> int:
    return 2 if any(isinstance(t, Cut) for t in query) else 1


def step(
    state: State,
    program: Program,
    next_mark: int = 1,
    supply: Optional[VarSupply] = None,
    fresh: bool = False,
) -> Optional[Step]:
    """Apply the unique applicable rule, or return None on ``ε`` / variable-headed goals.

    ``next_mark`` is the smallest mark Case may use; it is raised above every
    mark in ``state`` unless ``fresh`` says it already is.  Clause variables
    are renamed with ``supply``, which defaults to indices above those in
    ``state``.
    """
    if not state:
        return None
    first, rest = state[0], state[1:]

    if isinstance(first, Marker):
        return Step(FAIL, rest, None, next_mark)

    if isinstance(first, Goal):
        if not first.atoms:
            return Step(SUC, rest, None, next_mark)
        t = first.atoms[0]
        if isinstance(t, Cut):
            head = Goal(first.atoms[1:], first.answer)
            for j, e in enumerate(rest):
                if isinstance(e, Marker) and e.mark == t.mark:
                    return Step(CUT, (head,) + rest[j:], None, next_mark)
            return Step(CUT, (head,), None, next_mark)
        if not isinstance(t, Struct):
            return None
        m = next_mark
        if not fresh:
            marks = state_marks(state)
            m = max(next_mark, max(marks) + 1 if marks else 1)
        alts = tuple(Labeled(first.atoms, c.index, m, first.answer) for c in program.slice(t))
        return Step(CASE, alts + (Marker(m),) + rest, None, m + 1)

    t = first.atoms[0]
    if not isinstance(t, Struct):
        return None
    if supply is None:
        supply = VarSupply(next_var=max_var_idx(state_terms(state)) + 1)
    clause = rename_clause(program[first.clause], supply)
    sigma = unify(t, clause.head)
    if sigma is None:
        return Step(BACKTRACK, rest, None, next_mark)
    goal = apply_all(sigma, relabel_cuts(clause.body, first.mark) + first.atoms[1:])
    answer = apply_all(sigma, first.answer)
    return Step(EVAL, (Goal(goal, answer),) + rest, restrict(sigma, term_vars(t)), next_mark)


TERMINATED = "terminated"
BUDGET_EXCEEDED = "budget-exceeded"
STUCK = "stuck-on-variable"


@dataclass
class RunResult:
    status: str
    initial: State
    trace: list[Step]
    answers: list[Subst]
    steps: int = -1

    def __post_init__(self):
        if self.steps < 0:
            self.steps = len(self.trace)

    @property
    def final(self) -> State:
        return self.trace[-1].state if self.trace else self.initial

    @property
    def terminated(self) -> bool:
        return self.status == TERMINATED

    @property
    def rules(self) -> list[str]:
        return [s.rule for s in self.trace]

    def states(self) -> list[State]:
        return [self.initial] + [s.state for s in self.trace]


def run(query: Sequence[Term], program: Program, budget: int = 10_000, record: bool = True) -> RunResult:
    """Run ``query`` for at most ``budget`` rule applications."""
    if budget <= 0:
        raise ValueError("budget must be positive")
    return run_state(initial_state(query), program, budget, first_free_mark(query), vars_in_order(query), record)


def run_state(
    state: State,
    program: Program,
    budget: int,
    next_mark: int = 1,
    query_vars: Sequence[Var] = (),
    record: bool = True,
) -> RunResult:
    """Run from ``state``; with ``record=False`` only the last step is kept in the trace."""
    initial = state
    supply = VarSupply(next_var=max_var_idx(state_terms(state)) + 1)
    marks = state_marks(state)
    next_mark = max(next_mark, max(marks) + 1 if marks else 1)
    trace: list[Step] = []
    answers: list[Subst] = []
    n = 0
    while state and n < budget:
        s = step(state, program, next_mark, supply, fresh=True)
        if s is None:
            return RunResult(STUCK, initial, trace, answers, n)
        if s.rule == SUC and query_vars:
            answers.append(Subst(zip(query_vars, state[0].answer)))
        elif s.rule == SUC:
            answers.append(Subst())
        if record or not trace:
            trace.append(s)
        else:
            trace[0] = s
        n += 1
        state, next_mark = s.state, s.next_mark
    status = TERMINATED if not state else BUDGET_EXCEEDED
    return RunResult(status, initial, trace, answers, n)


def derives(
    query: Sequence[Term],
    target: Sequence[Term],
    program: Program,
    budget: int = 10_000,
) -> Optional[Subst]:
    """Search a bounded run of ``query`` for a state led by ``target`` (up to renaming).

    Returns the answer substitution restricted to the query variables at the
    first such state, or None.
    """
    qvars = vars_in_order(query)
    want = strip_cut_marks(target)
    result = run(query, program, budget)
    for st in result.states():
        if st and not isinstance(st[0], Marker) and variant(strip_labels(st[0]), want):
            return Subst(zip(qvars, st[0].answer))
    return None


def format_trace(result: RunResult) -> str:
    """One line per step, ``<rule> <state>``, preceded by the initial state."""
    lines = [f"Init {format_state(result.initial)}"]
    lines.extend(f"{s.rule} {format_state(s.state)}" for s in result.trace)
    return "\n".join(lines)
