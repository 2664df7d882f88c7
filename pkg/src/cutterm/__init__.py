"""Turn logic programs with cut into cut-free programs whose termination implies the original's.

Pipeline: parse a program, build a termination graph for a moded query over
abstract states, then read a definite program off the graph's clause paths.
"""

from .abstract import AbstractState, KnowledgeBase, root_state
from .graph import BudgetExhausted, BuildConfig, TerminationGraph, build, to_dot, validate
from .groundness import GroundnessTable, analyze, approx_gnd
from .harness import check_entry, check_simulation, load_corpus, run_suite, soundness_direction
from .interpreter import RunResult, format_trace, run, step
from .parser import ParseError, QuerySpec, load_program, parse_goal, parse_program, parse_query, parse_term, print_program
from .synth import NotProper, SynthesizedProgram, synthesize
from .terms import Clause, Cut, Program, Struct, Subst, Var, apply, compose, unify

__version__ = "0.1.0"

__all__ = [
    "AbstractState", "KnowledgeBase", "root_state",
    "BudgetExhausted", "BuildConfig", "TerminationGraph", "build", "to_dot", "validate",
    "GroundnessTable", "analyze", "approx_gnd",
    "check_entry", "check_simulation", "load_corpus", "run_suite", "soundness_direction",
    "RunResult", "format_trace", "run", "step",
    "ParseError", "QuerySpec", "load_program", "parse_goal", "parse_program", "parse_query", "parse_term",
    "print_program",
    "NotProper", "SynthesizedProgram", "synthesize",
    "Clause", "Cut", "Program", "Struct", "Subst", "Var", "apply", "compose", "unify",
]
