"""
Termination-graph construction.

The builder expands abstract states depth first, left child first, with a
fixed rule priority so that equal inputs always give equal graphs:

1. Suc, Fail, Cut and Backtrack, whenever they apply;
2. Instance, against the ancestors of the node (optionally every expanded node);
3. Split, for a single goal with at least two atoms;
4. Case;
5. Parallel, splitting off the first clause alternative (see ``_parallel_point``);
6. Eval.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .abstract import (
    INSTANCE,
    PARALLEL,
    SPLIT,
    AbstractState,
    RuleNotApplicable,
    active_cuts,
    active_marks,
    applicable_backtrack,
    apply_state,
    backtrack,
    case,
    cut,
    eval_mgu,
    eval_rule,
    fail,
    instance_subst,
    normalize,
    parallel,
    root_state,
    split,
    suc,
)
from .groundness import GroundnessTable, analyze
from .interpreter import BACKTRACK, CASE, CUT, EVAL, FAIL, SUC, Goal, Labeled, Marker, state_marks
from .parser import QuerySpec
from .terms import Program, Struct, Subst, Var, VarSupply, max_var_idx, restrict

ANCESTORS = "ancestors"
ALL_NODES = "all"
SPLIT_FIRST_ATOM = "first-atom"
SPLIT_NEVER = "never"

CHILD_COUNT = {
    SUC: 1,
    FAIL: 1,
    CUT: 1,
    CASE: 1,
    BACKTRACK: 1,
    INSTANCE: 1,
    EVAL: 2,
    PARALLEL: 2,
    SPLIT: 2,
}


class BudgetExhausted(Exception):
    def __init__(self, max_nodes: int):
        super().__init__(f"no termination graph within {max_nodes} nodes")
        self.max_nodes = max_nodes


@dataclass(frozen=True)
class BuildConfig:
    max_nodes: int = 10_000
    parallel_threshold: int = 2
    split_policy: str = SPLIT_FIRST_ATOM
    instance_scope: str = ANCESTORS

    def __post_init__(self):
        if self.max_nodes <= 0:
            raise ValueError("max_nodes must be positive")
        if self.parallel_threshold <= 0:
            raise ValueError("parallel_threshold must be positive")
        if self.split_policy not in (SPLIT_FIRST_ATOM, SPLIT_NEVER):
            raise ValueError(f"unknown split policy {self.split_policy!r}")
        if self.instance_scope not in (ANCESTORS, ALL_NODES):
            raise ValueError(f"unknown instance scope {self.instance_scope!r}")


@dataclass
class Node:
    id: int
    state: AbstractState
    parent: Optional[int] = None
    rule: Optional[str] = None
    children: list[int] = field(default_factory=list)
    labels: list[Optional[Subst]] = field(default_factory=list)
    # Parallel: position of the split
    split_at: Optional[int] = None

    @property
    def is_leaf(self) -> bool:
        return self.rule is None


@dataclass
class Edge:
    src: int
    dst: int
    rule: str
    label: Optional[Subst]
    position: int


def node_name(i: int) -> str:
    """a, b, ..., z, aa, ab, ... for 0, 1, 2, ..."""
    s = ""
    i += 1
    while i:
        i, r = divmod(i - 1, 26)
        s = chr(ord("a") + r) + s
    return s


class TerminationGraph:
    def __init__(self, program: Program, nodes: list[Node], query: Optional[QuerySpec] = None):
        self.program = program
        self.nodes = nodes
        self.query = query
        self.root = 0

    def __len__(self):
        return len(self.nodes)

    def __getitem__(self, i: int) -> Node:
        return self.nodes[i]

    def edges(self) -> list[Edge]:
        out = []
        for n in self.nodes:
            for pos, (c, lab) in enumerate(zip(n.children, n.labels), 1):
                out.append(Edge(n.id, c, n.rule, lab, pos))
        return out

    def nodes_with(self, rule: str) -> list[Node]:
        return [n for n in self.nodes if n.rule == rule]

    def leaves(self) -> list[Node]:
        return [n for n in self.nodes if n.is_leaf]

    def stuck_leaves(self) -> list[Node]:
        return [n for n in self.leaves() if _starts_with_variable(n.state)]

    @property
    def proper(self) -> bool:
        return not self.stuck_leaves()

    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for n in self.nodes:
            key = n.rule or "leaf"
            out[key] = out.get(key, 0) + 1
        return out

    def to_dict(self) -> dict:
        return {
            "query": str(self.query) if self.query else None,
            "root": self.root,
            "proper": self.proper,
            "nodes": [
                {
                    "id": n.id,
                    "name": node_name(n.id),
                    "state": str(n.state),
                    "rule": n.rule,
                    "children": list(n.children),
                    "labels": [None if lab is None else str(lab) for lab in n.labels],
                    **({"split_at": n.split_at} if n.split_at is not None else {}),
                }
                for n in self.nodes
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1, ensure_ascii=False) + "\n"

    def __str__(self):
        lines = []
        for n in self.nodes:
            kids = ", ".join(
                f"{node_name(c)}" + (f" [{lab}]" if lab is not None else "") for c, lab in zip(n.children, n.labels)
            )
            tail = f"  --{n.rule}--> {kids}" if n.rule else ""
            lines.append(f"{node_name(n.id)}: {n.state}{tail}")
        return "\n".join(lines)


def _starts_with_variable(a: AbstractState) -> bool:
    if not a.state:
        return False
    first = a.state[0]
    return not isinstance(first, Marker) and bool(first.atoms) and isinstance(first.atoms[0], Var)


# ---------------------------------------------------------------------------
# builder


class _Builder:
    def __init__(self, program: Program, cfg: BuildConfig, table: GroundnessTable, start: AbstractState):
        self.program = program
        self.cfg = cfg
        self.table = table
        terms = []
        for e in start.state:
            if not isinstance(e, Marker):
                terms.extend(e.atoms)
        for s, t in start.U:
            terms += [s, t]
        marks = state_marks(start.state)
        self.supply = VarSupply(next_var=max_var_idx(terms) + 1, next_mark=max(marks, default=0) + 1)
        self.nodes: list[Node] = []

    def add(self, state: AbstractState, parent: Optional[int]) -> int:
        if len(self.nodes) >= self.cfg.max_nodes:
            raise BudgetExhausted(self.cfg.max_nodes)
        n = Node(len(self.nodes), state, parent)
        self.nodes.append(n)
        return n.id

    def ancestors(self, i: int) -> list[int]:
        out = []
        p = self.nodes[i].parent
        while p is not None:
            out.append(p)
            p = self.nodes[p].parent
        return sorted(out)

    def instance_target(self, i: int) -> Optional[tuple[int, Subst]]:
        a = self.nodes[i].state
        if not a.state:
            return None
        pool = self.ancestors(i) if self.cfg.instance_scope == ANCESTORS else range(len(self.nodes))
        for j in pool:
            n = self.nodes[j]
            if j == i or n.rule is None or n.rule == INSTANCE:
                continue
            mu = instance_subst(a, n.state)
            if mu is not None:
                return j, mu
        return None

    def _parallel_point(self, a: AbstractState) -> Optional[int]:
        st = a.state
        if len(st) < 2 or not isinstance(st[0], Labeled):
            return None
        head, rest = st[:1], st[1:]
        sound = not (active_cuts(head, self.program) & active_marks(rest))
        precise = not (active_cuts(head, self.program) & state_marks(rest))
        depth = len(active_marks(st))
        if precise:
            t = st[0].atoms[0]
            probe = VarSupply(next_var=self.supply.next_var)
            r = eval_mgu(t, self.program[st[0].clause], probe, probe.next_var) if isinstance(t, Struct) else None
            if r is not None and apply_state(restrict(r[0], a.G), rest) != rest:
                return 1
            if depth >= self.cfg.parallel_threshold:
                return 1
        if depth >= 2 * self.cfg.parallel_threshold:
            if sound:
                return 1
            for k in range(2, len(st)):
                if not (active_cuts(st[:k], self.program) & active_marks(st[k:])):
                    return k
        return None

    def expand(self, i: int) -> list[int]:
        n = self.nodes[i]
        a = n.state
        if not a.state or _starts_with_variable(a):
            return []
        first = a.state[0]
        rule, kids, split_at = None, None, None
        if isinstance(first, Marker):
            rule, kids = FAIL, fail(a)
        elif isinstance(first, Goal) and not first.atoms:
            rule, kids = SUC, suc(a)
        elif isinstance(first, Goal) and not isinstance(first.atoms[0], Struct):
            rule, kids = CUT, cut(a)
        elif isinstance(first, Labeled) and applicable_backtrack(a, self.program):
            rule, kids = BACKTRACK, backtrack(a, self.program)
        if rule is None:
            hit = self.instance_target(i)
            if hit is not None:
                n.rule, n.children, n.labels = INSTANCE, [hit[0]], [hit[1]]
                return []
        if rule is None and self.cfg.split_policy == SPLIT_FIRST_ATOM:
            if len(a.state) == 1 and isinstance(first, Goal) and len(first.atoms) >= 2:
                rule, kids = SPLIT, split(a, self.table, self.supply)
        if rule is None and isinstance(first, Goal):
            rule, kids = CASE, case(a, self.program, self.supply)
        if rule is None:
            k = self._parallel_point(a)
            if k is not None:
                rule, kids, split_at = PARALLEL, parallel(a, k, self.program), k
        if rule is None:
            rule, kids = EVAL, eval_rule(a, self.program, self.supply)
        n.rule, n.split_at = rule, split_at
        n.labels = [lab for _, lab in kids]
        n.children = [self.add(s, i) for s, _ in kids]
        return n.children


def build_from(
    program: Program,
    start: AbstractState,
    cfg: Optional[BuildConfig] = None,
    table: Optional[GroundnessTable] = None,
    query: Optional[QuerySpec] = None,
) -> TerminationGraph:
    cfg = cfg or BuildConfig()
    b = _Builder(program, cfg, table or analyze(program), start)
    stack = [b.add(normalize(start), None)]
    while stack:
        i = stack.pop()
        stack.extend(reversed(b.expand(i)))
    return TerminationGraph(program, b.nodes, query)


def build(
    program: Program,
    query: QuerySpec,
    cfg: Optional[BuildConfig] = None,
    table: Optional[GroundnessTable] = None,
) -> TerminationGraph:
    """Termination graph for ``query`` rooted at ``p(T1,...,Tn)`` with the moded positions ground."""
    start = root_state(query.predicate, query.arity, query.ground_positions)
    return build_from(program, start, cfg, table, query)


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    node: int
    kind: str
    detail: str = ""

    def __str__(self):
        return f"{node_name(self.node)}: {self.kind}" + (f" ({self.detail})" if self.detail else "")


INSTANCE_ONLY_CYCLE = "InstanceOnlyCycle"
NOT_FULLY_EXPANDED = "NotFullyExpanded"
BAD_CHILD_COUNT = "ChildCount"
BAD_INSTANCE = "BadInstance"
BAD_PARALLEL = "BadParallel"


def validate(g: TerminationGraph) -> list[Violation]:
    """Empty iff ``g`` is a termination graph whose Instance and Parallel edges check out."""
    out: list[Violation] = []
    for n in g.nodes:
        if n.is_leaf:
            if n.state.state and not _starts_with_variable(n.state):
                out.append(Violation(n.id, NOT_FULLY_EXPANDED, str(n.state)))
            continue
        want = CHILD_COUNT.get(n.rule)
        if want is None or len(n.children) != want or len(n.labels) != len(n.children):
            out.append(Violation(n.id, BAD_CHILD_COUNT, f"{n.rule} with {len(n.children)} children"))
            continue
        if any(not 0 <= c < len(g.nodes) for c in n.children):
            out.append(Violation(n.id, BAD_CHILD_COUNT, "child id out of range"))
            continue
        if n.rule == INSTANCE:
            target = g.nodes[n.children[0]]
            mu = n.labels[0]
            if (
                mu is None
                or instance_subst(n.state, target.state) is None
                or apply_state(mu, target.state.state) != n.state.state
            ):
                out.append(Violation(n.id, BAD_INSTANCE, f"not an instance of {node_name(target.id)}"))
        if n.rule == PARALLEL:
            k = n.split_at or 0
            s1, s2 = n.state.state[:k], n.state.state[k:]
            if not s1 or not s2 or active_cuts(s1, g.program) & active_marks(s2):
                out.append(Violation(n.id, BAD_PARALLEL, f"unsound split at {k}"))
    out.extend(_instance_cycles(g))
    return out


def _instance_cycles(g: TerminationGraph) -> list[Violation]:
    out = []
    seen_in_cycle: set[int] = set()
    for n in g.nodes:
        if n.rule != INSTANCE or n.id in seen_in_cycle:
            continue
        path = [n.id]
        cur = n
        while cur.rule == INSTANCE and cur.children:
            nxt = cur.children[0]
            if nxt in path:
                cyc = path[path.index(nxt):]
                seen_in_cycle.update(cyc)
                out.append(Violation(nxt, INSTANCE_ONLY_CYCLE, " -> ".join(node_name(x) for x in cyc + [nxt])))
                break
            path.append(nxt)
            cur = g.nodes[nxt]
    return out


# ---------------------------------------------------------------------------
# rendering


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def to_dot(g: TerminationGraph) -> str:
    lines = ["digraph termination {", "  node [shape=box, fontname=\"monospace\"];"]
    for n in g.nodes:
        lines.append(f'  n{n.id} [label="{node_name(n.id)}: {_dot_escape(str(n.state))}"];')
    for e in g.edges():
        text = e.rule if e.label is None else f"{e.rule}\\n{_dot_escape(str(e.label))}"
        style = ", style=dashed" if e.rule == INSTANCE else ""
        lines.append(f'  n{e.src} -> n{e.dst} [label="{text}"{style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


__all__ = [
    "ANCESTORS",
    "ALL_NODES",
    "SPLIT_FIRST_ATOM",
    "SPLIT_NEVER",
    "BudgetExhausted",
    "BuildConfig",
    "Node",
    "Edge",
    "TerminationGraph",
    "node_name",
    "build",
    "build_from",
    "Violation",
    "validate",
    "to_dot",
    "RuleNotApplicable",
]
