"""
Extraction of a cut-free definite program from a proper termination graph.

Every clause path ``n1 ... nk`` becomes one clause
``Ren(n1) sigma <- I, Ren(nk)`` where ``sigma`` collects the Eval and Split
substitutions along the path, skipping those of earlier alternatives of the
same case analysis, and ``I`` holds one atom per Split whose right branch the
path takes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .abstract import INSTANCE, SPLIT
from .graph import TerminationGraph, node_name
from .interpreter import EVAL, SUC, Labeled, Marker
from .parser import ANY, GROUND, QuerySpec, print_program
from .terms import (
    IDENTITY,
    Clause,
    Cut,
    Program,
    Struct,
    Subst,
    Term,
    Var,
    apply,
    compose,
    restrict,
    variant,
    vars_in_order,
)


class NotProper(Exception):
    def __init__(self, leaves: list[int]):
        names = ", ".join(node_name(i) for i in leaves)
        super().__init__(f"termination graph is not proper: variable-headed leaves {names}")
        self.leaves = leaves


@dataclass(frozen=True)
class ClausePath:
    nodes: tuple[int, ...]

    def __str__(self):
        return " -> ".join(node_name(i) for i in self.nodes)


@dataclass
class SynthesizedProgram:
    program: Program
    query: QuerySpec
    paths: list[ClausePath]
    names: dict[int, str]

    def __str__(self):
        return print_program(self.program, self.query)


def _succ1(g: TerminationGraph, rules) -> set[int]:
    return {n.children[0] for n in g.nodes if n.rule in rules and n.children}


def clause_paths(g: TerminationGraph) -> list[ClausePath]:
    """Every clause path, ordered by start node and then depth first, left child first."""
    succ1 = _succ1(g, (INSTANCE, SPLIT))
    instance = {n.id for n in g.nodes if n.rule == INSTANCE}
    ends = {n.id for n in g.nodes if n.rule == SUC} | instance | succ1
    starts = sorted({g.root} | succ1)
    out: list[ClausePath] = []

    def walk(path: list[int]):
        n = g.nodes[path[-1]]
        if n.id in instance:
            return
        for c in n.children:
            nxt = path + [c]
            if c in ends:
                out.append(ClausePath(tuple(nxt)))
            if c not in instance and c not in succ1:
                walk(nxt)

    for s in starts:
        walk([s])
    return out


def predicate_names(g: TerminationGraph) -> dict[int, str]:
    """Fresh predicate names ``<functor>_<letter>`` for the nodes that need their own symbol."""
    needs = sorted({g.root} | _succ1(g, (INSTANCE, SPLIT)))
    out = {}
    for k, i in enumerate(needs):
        out[i] = f"{_functor(g, i)}_{node_name(k)}"
    return out


def _functor(g: TerminationGraph, i: int) -> str:
    for e in g.nodes[i].state.state:
        if isinstance(e, Marker):
            continue
        for t in e.atoms:
            if isinstance(t, Struct):
                return t.functor
    return "p"


def ren(g: TerminationGraph, i: int, names: Optional[dict[int, str]] = None) -> Optional[Term]:
    """The atom standing for node ``i``; None for the empty goal of a Suc node."""
    names = names if names is not None else predicate_names(g)
    n = g.nodes[i]
    if n.rule == SUC:
        return None
    if n.rule == INSTANCE:
        return apply(n.labels[0], ren(g, n.children[0], names))
    if i not in names:
        raise ValueError(f"node {node_name(i)} has no predicate of its own")
    return Struct(names[i], n.state.variables())


def path_subst(path: ClausePath | tuple[int, ...], g: TerminationGraph, d: float = math.inf) -> Subst:
    """The substitution collected along ``path`` given the mark bound ``d``."""
    nodes = path.nodes if isinstance(path, ClausePath) else tuple(path)
    sigma: Subst = IDENTITY
    # walk backwards; each step prepends its contribution
    for j in range(len(nodes) - 1, 0, -1):
        prev, cur = g.nodes[nodes[j - 1]], nodes[j]
        step: Subst = IDENTITY
        if prev.rule == SPLIT and cur == prev.children[1]:
            step = prev.labels[1]
        elif prev.rule == EVAL and cur == prev.children[0]:
            first = prev.state.state[0]
            assert isinstance(first, Labeled)
            m = first.mark
            if d > m:
                step, d = prev.labels[0], m
            else:
                step = restrict(prev.labels[0], prev.state.G)
        sigma = compose(step, sigma)
    return sigma


def intermediate_atoms(path: ClausePath, g: TerminationGraph, names: Optional[dict[int, str]] = None) -> list[Term]:
    names = names if names is not None else predicate_names(g)
    out = []
    nodes = path.nodes
    for j in range(len(nodes) - 1):
        n = g.nodes[nodes[j]]
        if n.rule == SPLIT and nodes[j + 1] == n.children[1]:
            out.append(apply(path_subst(nodes[j:], g), ren(g, n.children[0], names)))
    return out


def path_clause(path: ClausePath, g: TerminationGraph, names: dict[int, str], index: int) -> Clause:
    head = apply(path_subst(path, g), ren(g, path.nodes[0], names))
    body = intermediate_atoms(path, g, names)
    last = ren(g, path.nodes[-1], names)
    if last is not None:
        body.append(last)
    return Clause(head, tuple(body), index)


def _concrete_names(c: Clause, index: int) -> Clause:
    """Abstract ``Tk`` become ordinary clause variables printed ``Tk``."""
    ren_ = {v: Var(f"{v.name}{v.idx}") for v in vars_in_order((c.head,) + c.body) if v.abstract}
    return Clause(apply(ren_, c.head), tuple(apply(ren_, t) for t in c.body), index)


def _check_root(g: TerminationGraph) -> tuple[Struct, list[Var]]:
    st = g.nodes[g.root].state.state
    atom = st[0].atoms[0] if len(st) == 1 and not isinstance(st[0], Marker) and len(st[0].atoms) == 1 else None
    if not isinstance(atom, Struct):
        raise ValueError("synthesis needs a root of the form p(T1,...,Tn)")
    args = list(atom.args)
    if not all(isinstance(a, Var) and a.abstract for a in args) or len(set(args)) != len(args):
        raise ValueError("synthesis needs a root of the form p(T1,...,Tn)")
    return atom, args


def synthesize(g: TerminationGraph) -> SynthesizedProgram:
    stuck = [n.id for n in g.stuck_leaves()]
    if stuck:
        raise NotProper(stuck)
    _, args = _check_root(g)
    names = predicate_names(g)
    paths = clause_paths(g)
    clauses: list[Clause] = []
    for p in paths:
        c = _concrete_names(path_clause(p, g, names, len(clauses) + 1), len(clauses) + 1)
        if any(variant((c.head,) + c.body, (d.head,) + d.body) and len(c.body) == len(d.body) for d in clauses):
            continue
        clauses.append(c)
    for c in clauses:
        if any(isinstance(t, Cut) for t in c.body):
            raise AssertionError("synthesized clause contains a cut")
    root_g = g.nodes[g.root].state.G
    query = QuerySpec(names[g.root], tuple(GROUND if a in root_g else ANY for a in args))
    return SynthesizedProgram(Program(tuple(clauses)), query, paths, names)


__all__ = [
    "NotProper",
    "ClausePath",
    "SynthesizedProgram",
    "clause_paths",
    "predicate_names",
    "ren",
    "path_subst",
    "intermediate_atoms",
    "path_clause",
    "synthesize",
]
