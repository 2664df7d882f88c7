"""Why substitutions along a path must follow the marks.

Both clauses of p sit on one path through the graph. Collecting the Eval
substitutions blindly would reuse f(X) for the second alternative; following
the marks gives one fact per alternative.
"""

from cutterm import build, load_corpus, synthesize

entry = load_corpus()["ex6_marks"]
print(entry.program)
print()
print(synthesize(build(entry.program, entry.query)))
