import random
import shutil

import pytest

from cutterm.graph import BuildConfig, build
from cutterm.harness import (
    CORPUS_DIR,
    Corpus,
    CorpusEntry,
    check_entry,
    check_simulation,
    load_corpus,
    load_entry,
    run_suite,
    sample_queries,
    seed,
    simulate_node,
    soundness_direction,
    strip_outer_markers,
    write_goldens,
)
from cutterm.interpreter import EVAL, Goal, Marker
from cutterm.parser import QuerySpec, parse_program
from cutterm.synth import SynthesizedProgram
from cutterm.terms import Struct, is_ground
from support import CORPUS


def test_corpus_layout():
    names = [e.name for e in CORPUS]
    assert names == sorted(names) and len(names) == 6
    for e in CORPUS:
        assert e.golden_graph and e.golden_synth
        assert (CORPUS_DIR / f"{e.name}.golden" / "graph.json").exists()


def test_corpus_names_unique():
    e = CORPUS["ex3_peano"]
    with pytest.raises(ValueError):
        Corpus([e, e])


def test_seed_from_environment(monkeypatch):
    monkeypatch.setenv("CUT_SEED", "42")
    assert seed() == 42
    monkeypatch.delenv("CUT_SEED")
    assert seed() == 0


def test_strip_outer_markers():
    q = Goal((Struct("q"),))
    assert strip_outer_markers((Marker(1), q, Marker(2), q, Marker(3))) == (q, Marker(2), q)


@pytest.mark.parametrize("name", [e.name for e in CORPUS])
def test_entry_passes_quick(name):
    r = check_entry(CORPUS[name], samples=4, queries=5)
    assert r.passed, r.summary()
    assert r.graph_golden and r.synth_golden


def test_simulation_catches_mutated_edge():
    e = CORPUS["ex3_peano"]
    g = build(e.program, e.query)
    assert check_simulation(g, samples=5).ok
    ev = g.nodes_with(EVAL)[0]
    # redirect the success edge to the failure child
    ev.children[0] = ev.children[1]
    rep = check_simulation(g, samples=5)
    assert not rep.ok
    assert any(f.node == ev.id for f in rep.failures)


def test_simulate_single_node():
    e = CORPUS["ex1_div"]
    g = build(e.program, e.query)
    gamma = {v: Struct("0") for v in g[0].state.variables()}
    assert simulate_node(g, 0, gamma) is None


def test_simulation_is_deterministic():
    e = CORPUS["ex6_marks"]
    g = build(e.program, e.query)
    a = check_simulation(g, samples=5, rng_seed=9)
    b = check_simulation(g, samples=5, rng_seed=9)
    assert (a.checked, a.failures, a.unsampled) == (b.checked, b.failures, b.unsampled)


def test_sample_queries_respect_moding():
    e = CORPUS["ex1_div"]
    qs = sample_queries(e.program, e.query, 30, random.Random(1))
    assert len(qs) == 30
    assert all(is_ground(q[0]) and is_ground(q[1]) for q in qs)


def test_soundness_flags_a_bad_transformation():
    original = parse_program("p(X) :- p(X).")
    fake = SynthesizedProgram(parse_program("p_a(X)."), QuerySpec("p_a", ("g",)), [], {})
    rep = soundness_direction(original, QuerySpec("p", ("g",)), fake, count=3, orig_budget=500)
    assert rep.synth_terminated == 3 and len(rep.violations) == 3


def test_swapped_goldens_fail():
    a, b = CORPUS["ex3_peano"], CORPUS["ex4_peano_fact"]
    swapped = CorpusEntry(a.name, a.program, a.query, b.golden_graph, b.golden_synth)
    r = check_entry(swapped, samples=1, queries=1)
    assert not r.passed
    assert r.graph_golden is False and r.synth_golden is False
    assert "MISMATCH" in r.summary()


def test_empty_corpus_passes():
    rep = run_suite(Corpus([]))
    assert rep.passed and str(rep).endswith("PASS: 0/0")


def test_budget_exhausted_entry_fails():
    r = check_entry(CORPUS["ex1_div"], BuildConfig(max_nodes=3), samples=1, queries=1)
    assert not r.passed and "3 nodes" in r.error


def test_write_goldens_round_trip(tmp_path):
    src = CORPUS_DIR / "ex5_split.pl"
    shutil.copy(src, tmp_path / "ex5_split.pl")
    e = load_entry(tmp_path / "ex5_split.pl")
    assert e.golden_graph is None
    write_goldens(e)
    again = load_entry(tmp_path / "ex5_split.pl")
    assert again.golden_graph == CORPUS["ex5_split"].golden_graph
    assert again.golden_synth == CORPUS["ex5_split"].golden_synth
    assert len(load_corpus(tmp_path)) == 1
