"""
Terms, substitutions, unification and programs.

Variables come in two sorts: ordinary (concrete) program variables and
abstract variables that stand for arbitrary terms of a query class.  Cuts are
a separate constructor so that "no cut below the top level of a goal" can be
enforced when a compound is built.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, Optional, Sequence


_PLAIN_ATOM = re.compile(r"^(?:[a-z][A-Za-z0-9_]*|[0-9]+)$")


class Term:
    __slots__ = ()


class Var(Term):
    """A variable.  ``abstract`` selects the sort; ``idx`` separates fresh copies."""

    __slots__ = ("name", "abstract", "idx", "_hash")

    def __init__(self, name: str, abstract: bool = False, idx: int = 0):
        self.name = name
        self.abstract = abstract
        self.idx = idx
        self._hash = hash((name, abstract, idx))

    def __eq__(self, other):
        return (
            isinstance(other, Var)
            and self.idx == other.idx
            and self.abstract == other.abstract
            and self.name == other.name
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Var({self.name!r}, abstract={self.abstract}, idx={self.idx})"

    def __str__(self):
        if self.abstract:
            return f"{self.name}{self.idx}"
        if self.name == "_" or self.idx == 0:
            return self.name
        return f"{self.name}_{self.idx}"

    def sort_key(self):
        return (not self.abstract, self.name, self.idx)


def avar(idx: int, name: str = "T") -> Var:
    return Var(name, True, idx)


class Struct(Term):
    __slots__ = ("functor", "args", "_hash")

    def __init__(self, functor: str, args: Sequence[Term] = ()):
        args = tuple(args)
        for a in args:
            if isinstance(a, Cut):
                raise ValueError(f"cut may not occur as an argument of {functor}/{len(args)}")
        self.functor = functor
        self.args = args
        self._hash = hash((functor, args))

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def key(self) -> tuple[str, int]:
        return (self.functor, len(self.args))

    def __eq__(self, other):
        # iterative so that very deep terms (long runs) compare safely
        stack = [(self, other)]
        while stack:
            a, b = stack.pop()
            if a is b:
                continue
            if isinstance(a, Struct):
                if not (
                    isinstance(b, Struct)
                    and a._hash == b._hash
                    and a.functor == b.functor
                    and len(a.args) == len(b.args)
                ):
                    return False
                stack.extend(zip(a.args, b.args))
            elif a != b:
                return False
        return True

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Struct({self.functor!r}, {list(self.args)!r})"

    def __str__(self):
        parts: list[str] = []
        stack: list = [self]
        while stack:
            u = stack.pop()
            if isinstance(u, str):
                parts.append(u)
            elif isinstance(u, Struct):
                parts.append(_atom_text(u.functor))
                if u.args:
                    stack.append(")")
                    for k in range(len(u.args) - 1, -1, -1):
                        stack.append(u.args[k])
                        if k:
                            stack.append(", ")
                    stack.append("(")
            else:
                parts.append(str(u))
        return "".join(parts)


def _atom_text(name: str) -> str:
    return name if _PLAIN_ATOM.match(name) else "'" + name.replace("'", "\\'") + "'"


class Cut(Term):
    """``!`` (mark None) or the labeled cut ``!_m``."""

    __slots__ = ("mark",)

    def __init__(self, mark: Optional[int] = None):
        self.mark = mark

    def __eq__(self, other):
        return isinstance(other, Cut) and self.mark == other.mark

    def __hash__(self):
        return hash(("!", self.mark))

    def __repr__(self):
        return f"Cut({self.mark})"

    def __str__(self):
        return "!" if self.mark is None else f"!_{self.mark}"


def atom(functor: str, *args: Term) -> Struct:
    return Struct(functor, args)


# ---------------------------------------------------------------------------
# traversal helpers


def iter_vars(t: Term) -> Iterator[Var]:
    """Variables of ``t`` in left-to-right order, with repetitions."""
    stack = [t]
    while stack:
        u = stack.pop()
        if isinstance(u, Var):
            yield u
        elif isinstance(u, Struct):
            stack.extend(reversed(u.args))


def vars_in_order(terms: Iterable[Term]) -> list[Var]:
    """Distinct variables by first occurrence."""
    seen = {}
    for t in terms:
        for v in iter_vars(t):
            seen.setdefault(v, None)
    return list(seen)


def term_vars(t: Term) -> set[Var]:
    return set(iter_vars(t))


def is_ground(t: Term) -> bool:
    return next(iter_vars(t), None) is None


def abstract_vars(t: Term) -> set[Var]:
    return {v for v in iter_vars(t) if v.abstract}


def functors(t: Term) -> Iterator[tuple[str, int]]:
    stack = [t]
    while stack:
        u = stack.pop()
        if isinstance(u, Struct):
            yield u.key
            stack.extend(u.args)


def max_var_idx(terms: Iterable[Term]) -> int:
    m = 0
    for t in terms:
        for v in iter_vars(t):
            if v.idx > m:
                m = v.idx
    return m


def term_depth(t: Term) -> int:
    if isinstance(t, Struct) and t.args:
        return 1 + max(term_depth(a) for a in t.args)
    return 0


# ---------------------------------------------------------------------------
# substitutions


class Subst(Mapping):
    """Finite substitution.  Identity bindings are dropped on construction."""

    __slots__ = ("_map",)

    def __init__(self, bindings: Mapping[Var, Term] | Iterable[tuple[Var, Term]] = ()):
        items = bindings.items() if isinstance(bindings, Mapping) else bindings
        self._map = {v: t for v, t in items if v != t}

    def __getitem__(self, v):
        return self._map[v]

    def __iter__(self):
        return iter(self._map)

    def __len__(self):
        return len(self._map)

    def __eq__(self, other):
        if isinstance(other, Subst):
            return self._map == other._map
        if isinstance(other, Mapping):
            return self._map == dict(other)
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._map.items()))

    def __call__(self, t: Term) -> Term:
        return apply(self, t)

    def __repr__(self):
        return f"Subst({str(self)})"

    def __str__(self):
        if not self._map:
            return "id"
        parts = [f"{v}/{self._map[v]}" for v in sorted(self._map, key=Var.sort_key)]
        return "{" + ", ".join(parts) + "}"

    def range_terms(self) -> list[Term]:
        return list(self._map.values())

    def is_renaming(self) -> bool:
        vals = list(self._map.values())
        return all(isinstance(v, Var) for v in vals) and len(set(vals)) == len(vals)


IDENTITY = Subst()


def _rebuild(t: Term, leaf, expand: bool = False) -> Term:
    """Replace every variable ``v`` of ``t`` by ``leaf(v)`` using an explicit stack.

    With ``expand`` the replacement is itself traversed again.
    """
    out: list[Term] = []
    stack: list = [(t, False)]
    while stack:
        u, done = stack.pop()
        if done:
            n = len(u.args)
            new = tuple(out[-n:])
            del out[-n:]
            out.append(u if all(a is b for a, b in zip(new, u.args)) else Struct(u.functor, new))
        elif isinstance(u, Struct) and u.args:
            stack.append((u, True))
            stack.extend((a, False) for a in reversed(u.args))
        elif isinstance(u, Var):
            w = leaf(u)
            if expand and isinstance(w, Struct) and w.args:
                stack.append((w, False))
            else:
                out.append(w)
        else:
            out.append(u)
    return out[0]


def _apply(sigma, t: Term) -> Term:
    if isinstance(t, Var):
        return sigma.get(t, t)
    if isinstance(t, Struct):
        if not t.args:
            return t
        new = tuple(_apply(sigma, a) for a in t.args)
        if all(a is b for a, b in zip(new, t.args)):
            return t
        return Struct(t.functor, new)
    return t


def apply(sigma: Mapping[Var, Term], t: Term) -> Term:
    if not sigma:
        return t
    try:
        return _apply(sigma, t)
    except RecursionError:
        return _rebuild(t, lambda v: sigma.get(v, v))


def apply_all(sigma: Mapping[Var, Term], ts: Iterable[Term]) -> tuple[Term, ...]:
    return tuple(apply(sigma, t) for t in ts)


def compose(sigma: Mapping[Var, Term], tau: Mapping[Var, Term]) -> Subst:
    """``compose(s, t)`` applies ``s`` first, then ``t``."""
    out = {v: apply(tau, t) for v, t in sigma.items()}
    for v, t in tau.items():
        if v not in sigma:
            out[v] = t
    return Subst(out)


def restrict(sigma: Mapping[Var, Term], keep: Iterable[Var]) -> Subst:
    keep = set(keep)
    return Subst({v: t for v, t in sigma.items() if v in keep})


def is_idempotent(sigma: Mapping[Var, Term]) -> bool:
    dom = set(sigma)
    return all(not (term_vars(t) & dom) for t in sigma.values())


# ---------------------------------------------------------------------------
# unification and matching


def _walk(t: Term, b: dict) -> Term:
    while isinstance(t, Var) and t in b:
        t = b[t]
    return t


def _occurs(v: Var, t: Term, b: dict) -> bool:
    stack = [t]
    while stack:
        u = _walk(stack.pop(), b)
        if u == v:
            return True
        if isinstance(u, Struct):
            stack.extend(u.args)
    return False


def _resolve(t: Term, b: dict) -> Term:
    """``t`` with the triangular bindings ``b`` fully applied."""
    t = _walk(t, b)
    if not isinstance(t, Struct):
        return t
    return _rebuild(t, lambda v: _walk(v, b), expand=True)


def unify(
    s: Term,
    t: Term,
    bindable: Optional[Callable[[Var], bool]] = None,
) -> Optional[Subst]:
    """Idempotent most general unifier of ``s`` and ``t`` with occurs check.

    When both sides are unbound variables the one from ``t`` is bound.
    ``bindable`` restricts which variables may be bound; the others behave
    like constants.  Returns None when no unifier exists.
    """
    b: dict[Var, Term] = {}
    can = bindable or (lambda v: True)
    stack = [(s, t)]
    while stack:
        x, y = stack.pop()
        x = _walk(x, b)
        y = _walk(y, b)
        if x is y or x == y:
            continue
        if isinstance(y, Var) and can(y):
            if _occurs(y, x, b):
                return None
            b[y] = x
        elif isinstance(x, Var) and can(x):
            if _occurs(x, y, b):
                return None
            b[x] = y
        elif (
            isinstance(x, Struct)
            and isinstance(y, Struct)
            and x.functor == y.functor
            and len(x.args) == len(y.args)
        ):
            stack.extend(zip(reversed(x.args), reversed(y.args)))
        else:
            return None
    return Subst({v: _resolve(v, b) for v in b})


def unifiable(s: Term, t: Term) -> bool:
    return unify(s, t) is not None


def match(pattern: Term, t: Term, subst: Optional[dict] = None) -> Optional[dict]:
    """One-sided matching: a dict ``m`` with ``apply(m, pattern) == t``, or None."""
    m = dict(subst) if subst else {}
    stack = [(pattern, t)]
    while stack:
        p, u = stack.pop()
        if isinstance(p, Var):
            bound = m.get(p)
            if bound is None:
                m[p] = u
            elif bound != u:
                return None
        elif isinstance(p, Struct):
            if not (isinstance(u, Struct) and u.functor == p.functor and len(u.args) == len(p.args)):
                return None
            stack.extend(zip(p.args, u.args))
        elif p != u:
            return None
    return m


def variant(s: Sequence[Term], t: Sequence[Term]) -> bool:
    """True iff the two term sequences are equal up to a bijective variable renaming."""
    if len(s) != len(t):
        return False
    fwd: dict = {}
    bwd: dict = {}
    stack = list(zip(s, t))
    while stack:
        a, b = stack.pop()
        if isinstance(a, Var) and isinstance(b, Var):
            if fwd.setdefault(a, b) != b or bwd.setdefault(b, a) != a:
                return False
        elif isinstance(a, Struct) and isinstance(b, Struct):
            if a.functor != b.functor or len(a.args) != len(b.args):
                return False
            stack.extend(zip(a.args, b.args))
        elif isinstance(a, Cut) and isinstance(b, Cut):
            if a.mark != b.mark:
                return False
        else:
            return False
    return True


# ---------------------------------------------------------------------------
# cuts


def relabel_cuts(body: Sequence[Term], mark: int) -> tuple[Term, ...]:
    return tuple(Cut(mark) if isinstance(t, Cut) else t for t in body)


def strip_cut_marks(body: Sequence[Term]) -> tuple[Term, ...]:
    return tuple(Cut() if isinstance(t, Cut) else t for t in body)


# ---------------------------------------------------------------------------
# programs


@dataclass(frozen=True)
class Clause:
    head: Struct
    body: tuple[Term, ...] = ()
    index: int = 0

    def __post_init__(self):
        if not isinstance(self.head, Struct):
            raise ValueError(f"clause head must be a compound term, got {self.head}")
        object.__setattr__(self, "body", tuple(self.body))

    @property
    def has_cut(self) -> bool:
        return any(isinstance(t, Cut) for t in self.body)

    def variables(self) -> list[Var]:
        return vars_in_order((self.head,) + self.body)

    def __str__(self):
        if not self.body:
            return f"{self.head}."
        return f"{self.head} :- {', '.join(map(str, self.body))}."


@dataclass(frozen=True)
class Program:
    clauses: tuple[Clause, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(self.clauses))
        for pos, c in enumerate(self.clauses, 1):
            if c.index != pos:
                raise ValueError(f"clause {c} has index {c.index}, expected {pos}")

    @classmethod
    def of(cls, clauses: Iterable[Clause]) -> "Program":
        """Build a program, renumbering clauses 1..n in the given order."""
        return cls(tuple(Clause(c.head, c.body, i) for i, c in enumerate(clauses, 1)))

    def __getitem__(self, i: int) -> Clause:
        return self.clauses[i - 1]

    def __len__(self):
        return len(self.clauses)

    def __iter__(self):
        return iter(self.clauses)

    def predicates(self) -> list[tuple[str, int]]:
        seen = {}
        for c in self.clauses:
            seen.setdefault(c.head.key, None)
            for b in c.body:
                if isinstance(b, Struct):
                    seen.setdefault(b.key, None)
        return list(seen)

    def slice(self, t: Term) -> list[Clause]:
        return slice_program(self, t)

    def __str__(self):
        return "\n".join(map(str, self.clauses))


def slice_program(program: Program, t: Term) -> list[Clause]:
    """All clauses whose head has the predicate symbol of ``t``, in program order."""
    if not isinstance(t, Struct):
        return []
    key = t.key
    return [c for c in program.clauses if c.head.key == key]


class VarSupply:
    """Monotone source of fresh variable indices and case-analysis marks."""

    def __init__(self, next_var: int = 1, next_mark: int = 1):
        self.next_var = next_var
        self.next_mark = next_mark

    def var(self, name: str = "T", abstract: bool = True) -> Var:
        v = Var(name, abstract, self.next_var)
        self.next_var += 1
        return v

    def mark(self) -> int:
        m = self.next_mark
        self.next_mark += 1
        return m


def rename_clause(c: Clause, supply: VarSupply) -> Clause:
    """Copy of ``c`` with every variable replaced by a fresh concrete one."""
    ren = {v: supply.var(v.name, abstract=False) for v in c.variables()}
    return Clause(apply(ren, c.head), apply_all(ren, c.body), c.index)
