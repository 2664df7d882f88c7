"""Run div(0, 0, Z) on the division program and print every step.

The second clause fires for a zero divisor: its cut commits, then
failure(a) has no matching clause, so the whole query fails finitely.
"""

from cutterm import format_trace, load_corpus, parse_term, run

prog = load_corpus()["ex1_div"].program
result = run([parse_term("div(0, 0, Z)")], prog, budget=100)
print(format_trace(result))
print(f"status {result.status}, answers {result.answers}")
