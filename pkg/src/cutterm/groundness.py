"""
Groundness propagation for the Split rule.

``GroundnessTable.ground(p, inputs)`` is a set of argument positions of ``p``
that are ground in every answer of a successful derivation, provided the
``inputs`` positions were ground at call time.  The table is the greatest
solution reachable from "no predicate ever succeeds" by re-evaluating every
clause left to right; predicates that never succeed map to all positions.
"""

from __future__ import annotations

from itertools import combinations
from typing import Iterable, Mapping, Optional

from .terms import Cut, Program, Struct, Term, Var, apply, term_vars

Key = tuple[str, int]


def _subsets(n: int):
    positions = range(1, n + 1)
    for k in range(n + 1):
        for c in combinations(positions, k):
            yield frozenset(c)


class GroundnessTable:
    def __init__(self, rows: Mapping[tuple[Key, frozenset], Optional[frozenset]]):
        # None marks a (predicate, inputs) pair with no successful derivation
        self.rows = dict(rows)

    def ground(self, pred: str | Key, inputs: Iterable[int], arity: Optional[int] = None) -> frozenset:
        key = pred if isinstance(pred, tuple) else (pred, arity)
        if key[1] is None:
            raise ValueError("arity needed to look up a predicate by name")
        inputs = frozenset(inputs)
        if (key, inputs) not in self.rows:
            return frozenset(range(1, key[1] + 1))
        out = self.rows[(key, inputs)]
        return frozenset(range(1, key[1] + 1)) if out is None else out

    def succeeds(self, key: Key, inputs: Iterable[int]) -> bool:
        return self.rows.get((key, frozenset(inputs))) is not None

    def dump(self) -> str:
        """One line per row: ``p/n {inputs} -> {outputs}``."""
        lines = []
        for (key, inputs), out in sorted(self.rows.items(), key=lambda kv: (kv[0][0], sorted(kv[0][1]), len(kv[0][1]))):
            shown = "never succeeds" if out is None else "{" + ",".join(map(str, sorted(out))) + "}"
            lines.append(f"{key[0]}/{key[1]} {{{','.join(map(str, sorted(inputs)))}}} -> {shown}")
        return "\n".join(lines)

    def __str__(self):
        return self.dump()


def _clause_output(head: Struct, body, inputs: frozenset, table) -> Optional[frozenset]:
    ground: set[Var] = set()
    for i in inputs:
        ground |= term_vars(head.args[i - 1])
    for b in body:
        if isinstance(b, Cut):
            continue
        if not isinstance(b, Struct):
            # call through a variable: nothing known about its bindings
            continue
        known = frozenset(j for j, a in enumerate(b.args, 1) if term_vars(a) <= ground)
        # predicates without clauses are absent from the table and never succeed
        out = table.get((b.key, known))
        if out is None:
            return None
        for j in out:
            ground |= term_vars(b.args[j - 1])
    return frozenset(i for i, a in enumerate(head.args, 1) if term_vars(a) <= ground)


def analyze(program: Program) -> GroundnessTable:
    preds = {c.head.key for c in program}
    table: dict = {}
    for key in preds:
        for inp in _subsets(key[1]):
            table[(key, inp)] = None
    changed = True
    while changed:
        changed = False
        for (key, inp), old in list(table.items()):
            outs = []
            for c in program.slice(Struct(key[0], [Var("_")] * key[1])):
                o = _clause_output(c.head, c.body, inp, table)
                if o is not None:
                    outs.append(o)
            new = None
            if outs:
                new = frozenset.intersection(*outs) | inp
            if new != old:
                table[(key, inp)] = new
                changed = True
    return GroundnessTable(table)


def approx_gnd(t: Term, mu: Mapping[Var, Term], g: Iterable[Var], table: GroundnessTable) -> set[Var]:
    """Abstract variables of ``t_j mu`` for every position ``j`` reported ground."""
    if not isinstance(t, Struct):
        return set()
    g = set(g)
    inputs = {i for i, a in enumerate(t.args, 1) if term_vars(a) <= g}
    out: set[Var] = set()
    for j in table.ground(t.key, inputs):
        out |= {v for v in term_vars(apply(mu, t.args[j - 1])) if v.abstract}
    return out
