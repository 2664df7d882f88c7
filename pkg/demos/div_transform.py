"""Build the termination graph for div(g, g, v) and print the cut-free program.

Any termination prover for definite programs can then be run on the output.
"""

from cutterm import build, load_corpus, synthesize, validate

entry = load_corpus()["ex1_div"]
g = build(entry.program, entry.query)
print(f"{len(g)} nodes, rules used: {g.counts()}")
print(f"validation problems: {validate(g) or 'none'}")
print()
print(synthesize(g))
