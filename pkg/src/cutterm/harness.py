"""
Corpus handling and the property checks shared by ``check`` and the tests.

``simulate_node`` takes a graph node and a concretization of its state,
performs one concrete step (or runs the split-off atom, for Split) and
verifies that the outcome is represented by the node's children.
``soundness_direction`` compares termination of the synthesized program on
sampled queries with termination of the original program.
"""

from __future__ import annotations

import os
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .abstract import (
    INSTANCE,
    PARALLEL,
    SPLIT,
    concretize,
    random_term,
    represents,
    sample_concretizations,
    signature_of,
)
from .graph import BudgetExhausted, BuildConfig, TerminationGraph, build, node_name, validate
from .interpreter import (
    CASE,
    EVAL,
    Goal,
    Marker,
    State,
    run,
    state_marks,
    step,
)
from .parser import QuerySpec, load_program, print_program
from .synth import NotProper, SynthesizedProgram, synthesize
from .terms import Program, Struct, Var, apply_all

CORPUS_DIR = Path(__file__).parent / "corpus"


def seed() -> int:
    """Sampling seed from ``CUT_SEED`` (default 0)."""
    return int(os.environ.get("CUT_SEED", "0"))


@dataclass
class CorpusEntry:
    name: str
    program: Program
    query: QuerySpec
    golden_graph: Optional[str] = None
    golden_synth: Optional[str] = None
    path: Optional[Path] = None


@dataclass
class Corpus:
    entries: list[CorpusEntry] = field(default_factory=list)

    def __post_init__(self):
        names = [e.name for e in self.entries]
        if len(names) != len(set(names)):
            raise ValueError("corpus entry names must be unique")

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, name: str) -> CorpusEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)


def load_entry(path: Path) -> CorpusEntry:
    program, query = load_program(path)
    if query is None:
        raise ValueError(f"{path}: corpus files need a %query: directive")
    gold = path.with_suffix(".golden")
    graph = (gold / "graph.json").read_text(encoding="utf-8") if (gold / "graph.json").exists() else None
    synth = (gold / "synth.pl").read_text(encoding="utf-8") if (gold / "synth.pl").exists() else None
    return CorpusEntry(path.stem, program, query, graph, synth, path)


def load_corpus(directory: Path | str = CORPUS_DIR) -> Corpus:
    return Corpus([load_entry(p) for p in sorted(Path(directory).glob("*.pl"))])


# ---------------------------------------------------------------------------
# simulation


def strip_outer_markers(state: Sequence) -> State:
    st = list(state)
    while st and isinstance(st[0], Marker):
        st.pop(0)
    while st and isinstance(st[-1], Marker):
        st.pop()
    return tuple(st)


@dataclass(frozen=True)
class SimulationFailure:
    node: int
    concrete: str
    reason: str

    def __str__(self):
        return f"{node_name(self.node)}: {self.concrete}: {self.reason}"


def _in_child(g: TerminationGraph, child: int, concrete: Sequence) -> bool:
    return represents(g.nodes[child].state, strip_outer_markers(concrete)) is not None


def simulate_node(g: TerminationGraph, i: int, gamma, run_budget: int = 2000) -> Optional[SimulationFailure]:
    """None when the concrete behaviour of ``concretize(node, gamma)`` is covered by the node's children."""
    n = g.nodes[i]
    concrete = concretize(n.state, gamma)
    shown = " | ".join(map(str, concrete)) or "ε"
    if n.rule is None:
        return None
    if n.rule == INSTANCE:
        if not _in_child(g, n.children[0], concrete):
            return SimulationFailure(i, shown, f"not represented by instance target {node_name(n.children[0])}")
        return None
    if n.rule == PARALLEL:
        k = n.split_at or 0
        for part, child in ((concrete[:k], n.children[0]), (concrete[k:], n.children[1])):
            if not _in_child(g, child, part):
                return SimulationFailure(i, shown, f"part not represented by {node_name(child)}")
        return None
    if n.rule == SPLIT:
        t, rest = concrete[0].atoms[0], concrete[0].atoms[1:]
        if not _in_child(g, n.children[0], (Goal((t,)),)):
            return SimulationFailure(i, shown, f"{t} not represented by {node_name(n.children[0])}")
        result = run([t], g.program, run_budget, record=False)
        for theta in result.answers:
            after = (Goal(apply_all(theta, rest)),)
            if not _in_child(g, n.children[1], after):
                return SimulationFailure(
                    i, shown, f"after answer {theta}: {after[0]} not represented by {node_name(n.children[1])}"
                )
        return None
    next_mark = 1
    if n.rule == CASE:
        new = state_marks(g.nodes[n.children[0]].state.state) - state_marks(n.state.state)
        next_mark = min(new) if new else max(state_marks(concrete), default=0) + 1
    s = step(concrete, g.program, next_mark)
    if s is None:
        return SimulationFailure(i, shown, "no concrete rule applies")
    if n.rule != EVAL and s.rule != n.rule:
        return SimulationFailure(i, shown, f"concrete step is {s.rule}, abstract rule is {n.rule}")
    if any(_in_child(g, c, s.state) for c in n.children):
        return None
    return SimulationFailure(i, shown, f"{s.rule} successor {' | '.join(map(str, s.state)) or 'ε'} not represented")


@dataclass
class SimulationReport:
    checked: int = 0
    nodes: int = 0
    unsampled: list[int] = field(default_factory=list)
    failures: list[SimulationFailure] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def check_simulation(g: TerminationGraph, samples: int = 20, rng_seed: Optional[int] = None) -> SimulationReport:
    """At least ``samples`` concretizations per node (repeating when fewer distinct ones exist)."""
    base = seed() if rng_seed is None else rng_seed
    sig = signature_of(g.program)
    rep = SimulationReport()
    for n in g.nodes:
        if n.rule is None or samples <= 0:
            continue
        rep.nodes += 1
        rng = random.Random(base * 1_000_003 + n.id)
        gammas = sample_concretizations(n.state, samples, sig, rng)
        if not gammas:
            rep.unsampled.append(n.id)
            continue
        draws = [gammas[k % len(gammas)] for k in range(samples)]
        seen = set()
        for gamma in draws:
            rep.checked += 1
            if gamma in seen:
                continue
            seen.add(gamma)
            f = simulate_node(g, n.id, gamma)
            if f is not None:
                rep.failures.append(f)
    return rep


# ---------------------------------------------------------------------------
# soundness direction


@dataclass
class SoundnessReport:
    queries: int = 0
    synth_terminated: int = 0
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def sample_queries(program: Program, query: QuerySpec, count: int, rng: random.Random, depth: int = 3) -> list[list]:
    """``count`` argument tuples respecting the moding (ground where ``g``)."""
    sig = sorted(set(signature_of(program)) | {("c", 0)})
    pool = [Var("X", False, i) for i in range(1, 3)]
    ground = set(query.ground_positions)
    return [
        [random_term(rng, sig, rng.randint(0, depth), i in ground, pool) for i in range(1, query.arity + 1)]
        for _ in range(count)
    ]


def soundness_direction(
    entry_program: Program,
    query: QuerySpec,
    synth: SynthesizedProgram,
    count: int = 50,
    synth_budget: int = 10_000,
    orig_budget: int = 100_000,
    rng_seed: Optional[int] = None,
) -> SoundnessReport:
    rng = random.Random(seed() if rng_seed is None else rng_seed)
    rep = SoundnessReport()
    for args in sample_queries(entry_program, query, count, rng):
        rep.queries += 1
        r_syn = run([Struct(synth.query.predicate, args)], synth.program, synth_budget, record=False)
        if not r_syn.terminated:
            continue
        rep.synth_terminated += 1
        q = Struct(query.predicate, args)
        r_orig = run([q], entry_program, orig_budget, record=False)
        if not r_orig.terminated:
            rep.violations.append(f"{q}: synthesized query terminates, original ends {r_orig.status}")
    return rep


# ---------------------------------------------------------------------------
# suite


@dataclass
class EntryResult:
    name: str
    nodes: int = 0
    proper: bool = False
    violations: list[str] = field(default_factory=list)
    graph_golden: Optional[bool] = None
    synth_golden: Optional[bool] = None
    simulation: Optional[SimulationReport] = None
    soundness: Optional[SoundnessReport] = None
    error: Optional[str] = None
    synthesized: Optional[str] = None

    @property
    def passed(self) -> bool:
        return (
            self.error is None
            and not self.violations
            and self.graph_golden is not False
            and self.synth_golden is not False
            and (self.simulation is None or self.simulation.ok)
            and (self.soundness is None or self.soundness.ok)
        )

    def summary(self) -> str:
        if self.error:
            return f"{self.name}: FAIL ({self.error})"
        bits = [f"{self.nodes} nodes", "proper" if self.proper else "not proper"]
        if self.violations:
            bits.append(f"{len(self.violations)} graph violations")
        for label, flag in (("graph golden", self.graph_golden), ("synth golden", self.synth_golden)):
            if flag is not None:
                bits.append(f"{label} {'ok' if flag else 'MISMATCH'}")
        if self.simulation is not None:
            s = self.simulation
            bits.append(f"simulation {s.checked} checks/{len(s.failures)} failures")
        if self.soundness is not None:
            s = self.soundness
            bits.append(f"soundness {s.synth_terminated}/{s.queries} terminating, {len(s.violations)} violations")
        return f"{self.name}: {'PASS' if self.passed else 'FAIL'} ({', '.join(bits)})"


@dataclass
class Report:
    results: list[EntryResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def __str__(self):
        lines = [r.summary() for r in sorted(self.results, key=lambda r: r.name)]
        lines.append(f"{'PASS' if self.passed else 'FAIL'}: {sum(r.passed for r in self.results)}/{len(self.results)}")
        return "\n".join(lines)


def check_entry(
    entry: CorpusEntry,
    cfg: Optional[BuildConfig] = None,
    samples: int = 20,
    queries: int = 50,
    goldens: bool = True,
    budget: int = 10_000,
) -> EntryResult:
    """Build, validate, synthesize and run both property checks; ``budget`` bounds synthesized runs."""
    res = EntryResult(entry.name)
    try:
        g = build(entry.program, entry.query, cfg)
    except BudgetExhausted as exc:
        res.error = str(exc)
        return res
    res.nodes, res.proper = len(g), g.proper
    res.violations = [str(v) for v in validate(g)]
    if goldens and entry.golden_graph is not None:
        res.graph_golden = g.dumps() == entry.golden_graph
    synth = None
    if g.proper:
        try:
            synth = synthesize(g)
            res.synthesized = print_program(synth.program, synth.query)
        except (NotProper, ValueError) as exc:
            res.error = str(exc)
            return res
        if goldens and entry.golden_synth is not None:
            res.synth_golden = res.synthesized == entry.golden_synth
    res.simulation = check_simulation(g, samples)
    if synth is not None and queries > 0:
        res.soundness = soundness_direction(entry.program, entry.query, synth, queries, budget, 10 * budget)
    return res


def run_suite(corpus: Corpus, cfg: Optional[BuildConfig] = None, samples: int = 20, queries: int = 50) -> Report:
    return Report([check_entry(e, cfg, samples, queries) for e in sorted(corpus, key=lambda e: e.name)])


def write_goldens(entry: CorpusEntry, cfg: Optional[BuildConfig] = None) -> None:
    """Regenerate ``<name>.golden/`` next to the entry's source file."""
    if entry.path is None:
        raise ValueError("entry has no source path")
    g = build(entry.program, entry.query, cfg)
    gold = entry.path.with_suffix(".golden")
    gold.mkdir(exist_ok=True)
    (gold / "graph.json").write_text(g.dumps(), encoding="utf-8")
    if g.proper:
        s = synthesize(g)
        (gold / "synth.pl").write_text(print_program(s.program, s.query), encoding="utf-8")


__all__ = [
    "CORPUS_DIR",
    "seed",
    "CorpusEntry",
    "Corpus",
    "load_entry",
    "load_corpus",
    "strip_outer_markers",
    "SimulationFailure",
    "simulate_node",
    "SimulationReport",
    "check_simulation",
    "SoundnessReport",
    "sample_queries",
    "soundness_direction",
    "EntryResult",
    "Report",
    "check_entry",
    "run_suite",
    "write_goldens",
]
