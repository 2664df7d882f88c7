"""Reader and printer for the Prolog subset: facts, rules, cut, ``%`` comments.

Corpus files may carry a ``%query: p(g,v)`` directive naming the moded query
class the file is meant to be analysed for.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .terms import Clause, Cut, Program, Struct, Term, Var

GROUND = "g"
ANY = "v"


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0, source: str = "<string>"):
        super().__init__(f"{source}:{line}:{col}: {msg}")
        self.msg = msg
        self.line = line
        self.col = col
        self.source = source


@dataclass(frozen=True)
class QuerySpec:
    """Moded query class ``p(m1,...,mn)`` with each mode ``g`` (ground) or ``v`` (any)."""

    predicate: str
    moding: tuple[str, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.moding)

    @property
    def ground_positions(self) -> tuple[int, ...]:
        """1-based argument positions that must be ground."""
        return tuple(i for i, m in enumerate(self.moding, 1) if m == GROUND)

    def __str__(self):
        if not self.moding:
            return self.predicate
        return f"{self.predicate}({','.join(self.moding)})"


@dataclass(frozen=True)
class SourceProgram:
    text: str
    provenance: str = "<stdin>"


_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>%[^\n]*)
  | (?P<neck>:-)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<atom>[a-z][A-Za-z0-9_]*|[0-9]+|'(?:[^'\\]|\\.)*')
  | (?P<punct>[(),.!])
    """,
    re.VERBOSE,
)


class _Lexer:
    def __init__(self, text: str, source: str):
        self.text = text
        self.source = source
        self.toks: list[tuple[str, str, int, int]] = []
        line, lstart, pos = 1, 0, 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None:
                raise ParseError(f"unexpected character {text[pos]!r}", line, pos - lstart + 1, source)
            kind = m.lastgroup
            if kind not in ("ws", "comment"):
                self.toks.append((kind, m.group(), line, pos - lstart + 1))
            chunk = m.group()
            nl = chunk.count("\n")
            if nl:
                line += nl
                lstart = pos + chunk.rfind("\n") + 1
            pos = m.end()
        self.toks.append(("eof", "", line, pos - lstart + 1))
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, msg, tok=None):
        _, _, line, col = tok or self.peek()
        return ParseError(msg, line, col, self.source)

    def expect(self, text):
        tok = self.next()
        if tok[1] != text or tok[0] == "atom":
            raise self.error(f"expected {text!r}, got {tok[1] or 'end of input'!r}", tok)
        return tok


class _Parser:
    def __init__(self, text: str, source: str = "<string>"):
        self.lx = _Lexer(text, source)
        self.anon = 0

    def var(self, name: str) -> Var:
        if name == "_":
            self.anon += 1
            return Var("_", False, self.anon)
        return Var(name)

    def term(self, top: bool = False) -> Term:
        tok = self.lx.next()
        kind, text = tok[0], tok[1]
        if kind == "var":
            return self.var(text)
        if kind == "punct" and text == "!":
            if not top:
                raise self.lx.error("cut may not occur inside a compound term (cut as proper subterm)", tok)
            return Cut()
        if kind != "atom":
            raise self.lx.error(f"expected a term, got {text or 'end of input'!r}", tok)
        name = text[1:-1] if text.startswith("'") else text
        if self.lx.peek()[1] == "(" and self.lx.peek()[0] == "punct":
            self.lx.next()
            args = [self.term()]
            while self.lx.peek()[1] == ",":
                self.lx.next()
                args.append(self.term())
            self.lx.expect(")")
            return Struct(name, args)
        return Struct(name)

    def goals(self) -> list[Term]:
        out = [self.term(top=True)]
        while self.lx.peek()[1] == "," and self.lx.peek()[0] == "punct":
            self.lx.next()
            out.append(self.term(top=True))
        return out

    def clause(self, index: int) -> Clause:
        tok = self.lx.peek()
        head = self.term()
        if not isinstance(head, Struct):
            raise self.lx.error("clause head must be an atom or compound term", tok)
        body: list[Term] = []
        if self.lx.peek()[0] == "neck":
            self.lx.next()
            body = self.goals()
        self.lx.expect(".")
        return Clause(head, tuple(body), index)

    def program(self) -> Program:
        clauses = []
        while self.lx.peek()[0] != "eof":
            clauses.append(self.clause(len(clauses) + 1))
        return Program(tuple(clauses))


def parse_program(src: SourceProgram | str) -> Program:
    if isinstance(src, SourceProgram):
        return _Parser(src.text, src.provenance).program()
    return _Parser(src).program()


def parse_term(text: str) -> Term:
    p = _Parser(text)
    t = p.term()
    if p.lx.peek()[0] != "eof":
        raise p.lx.error("trailing input after term")
    return t


def parse_goal(text: str) -> list[Term]:
    """Comma-separated goal, optionally ending in ``.``; the empty string is the empty goal."""
    p = _Parser(text)
    if p.lx.peek()[0] == "eof":
        return []
    goals = p.goals()
    if p.lx.peek()[1] == ".":
        p.lx.next()
    if p.lx.peek()[0] != "eof":
        raise p.lx.error("trailing input after goal")
    return goals


_QUERY = re.compile(r"^\s*([a-z][A-Za-z0-9_]*)\s*(?:\(\s*([^()]*)\s*\))?\s*\.?\s*$")


def parse_query(text: str) -> QuerySpec:
    m = _QUERY.match(text)
    if m is None:
        raise ParseError(f"malformed moded query {text.strip()!r}; expected e.g. div(g,g,v)", 1, 1)
    name, args = m.group(1), m.group(2)
    if args is None:
        return QuerySpec(name, ())
    modes = [a.strip() for a in args.split(",")]
    for pos, mode in enumerate(modes, 1):
        if mode not in (GROUND, ANY):
            raise ParseError(f"argument {pos} of {name}: mode must be 'g' or 'v', got {mode!r}", 1, 1)
    return QuerySpec(name, tuple(modes))


def query_directive(text: str) -> Optional[QuerySpec]:
    """The first ``%query:`` directive in a source text, if any."""
    for line in text.splitlines():
        s = line.strip()
        if s.startswith("%query:"):
            return parse_query(s[len("%query:"):])
    return None


def read_source(path: str | Path) -> SourceProgram:
    p = Path(path)
    return SourceProgram(p.read_text(encoding="utf-8"), str(p))


def load_program(path: str | Path) -> tuple[Program, Optional[QuerySpec]]:
    src = read_source(path)
    return parse_program(src), query_directive(src.text)


def print_clause(c: Clause) -> str:
    return str(c)


def print_program(program: Program, query: Optional[QuerySpec] = None) -> str:
    lines = []
    if query is not None:
        lines.append(f"%query: {query}")
    lines.extend(print_clause(c) for c in program.clauses)
    return "\n".join(lines) + "\n" if lines else ""
