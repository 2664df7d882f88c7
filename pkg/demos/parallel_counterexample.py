"""A split of a state that would be unsound, and the check that prevents it.

With p :- p, the state  !_2 | !_1 | ?_2 | p  loops. Cutting it after !_2
gives two parts that each terminate, because !_1 would cut away the loop in
the second part. The active cut 2 of the first part reaches the mark 2 in the
second part, so the split is refused. Splitting after !_1 is fine.
"""

from cutterm import Cut, Struct, load_corpus
from cutterm.abstract import RuleNotApplicable, make_state, parallel
from cutterm.interpreter import Goal, Marker, format_state

prog = load_corpus()["parallel_loop"].program
state = make_state((Goal((Cut(2),)), Goal((Cut(1),)), Marker(2), Goal((Struct("p"),))))
print("state:", format_state(state.state))
for k in (1, 2):
    try:
        parts = parallel(state, k, prog)
        print(f"split at {k}: accepted ->", " || ".join(format_state(p.state) for p, _ in parts))
    except RuleNotApplicable as exc:
        print(f"split at {k}: refused ({exc.reason})")
