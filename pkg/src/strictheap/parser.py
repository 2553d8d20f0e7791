"""Recursive-descent parser for formulas, predicate definitions, and files.

Grammar:

    disj    := conj ('+' conj)*
    conj    := postfix ('*' postfix)*
    postfix := atom ['^-1']
    atom    := 'emp' | 'true' ['(' ident ')'] | 'false'
             | path '|->' value
             | ident '(' args ')'
             | 'ex' ident '.' disj
             | '(' disj ')'
    path    := ident ('.' ident)*
    value   := 'nil' | integer | ident

'*' binds tighter than '+'.  Chains of the same operator build right-nested
ASTs, matching the canonical form the normalizer produces.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .heap import Atom, FieldLabel, NIL, PLAIN
from .formula import (
    Call,
    Conj,
    Disj,
    EMP,
    Exists,
    FALSE_F,
    Formula,
    Inv,
    Path,
    PointsTo,
    PredicateDef,
    Sym,
    TRUE,
    TrueOf,
    Term,
    free_symbols,
)

KEYWORDS = {"emp", "true", "false", "ex", "nil", "def"}


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int, expected: frozenset[str] = frozenset()):
        loc = f"line {line}, col {col}"
        if expected:
            message = f"{message} (expected {', '.join(sorted(expected))})"
        super().__init__(f"{loc}: {message}")
        self.line = line
        self.col = col
        self.expected = expected


class DuplicateDefinition(Exception):
    def __init__(self, name: str, line: int):
        super().__init__(f"line {line}: predicate {name!r} defined twice")
        self.name = name


class UnboundSymbol(Exception):
    def __init__(self, pred: str, symbol: str, line: int):
        super().__init__(f"line {line}: {symbol!r} is free in the body of {pred!r}")
        self.pred = pred
        self.symbol = symbol


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT INT PUNCT EOF
    text: str
    line: int
    col: int


_PUNCT = ["|->", "^-1", "->", "(", ")", "*", "+", ".", ",", "="]


def tokenize(text: str, first_line: int = 1) -> list[Token]:
    toks: list[Token] = []
    line, col = first_line, 1
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(Token("IDENT", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Token("INT", text[i:j], line, col))
            col += j - i
            i = j
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                toks.append(Token("PUNCT", p, line, col))
                i += len(p)
                col += len(p)
                break
        else:
            raise ParseError(f"stray character {c!r}", line, col)
    toks.append(Token("EOF", "", line, col))
    return toks


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.pos = 0

    @property
    def cur(self) -> Token:
        return self.toks[self.pos]

    def advance(self) -> Token:
        t = self.cur
        self.pos += 1
        return t

    def fail(self, expected: set[str]) -> "ParseError":
        t = self.cur
        got = t.text if t.kind != "EOF" else "end of input"
        return ParseError(f"unexpected {got!r}", t.line, t.col, frozenset(expected))

    def eat(self, text: str) -> Token:
        if self.cur.text != text or self.cur.kind == "EOF":
            raise self.fail({text})
        return self.advance()

    def at(self, text: str) -> bool:
        return self.cur.kind != "EOF" and self.cur.text == text

    def ident(self, what: str = "identifier") -> str:
        t = self.cur
        if t.kind != "IDENT" or t.text in KEYWORDS:
            raise self.fail({what})
        self.advance()
        return t.text

    # grammar ---------------------------------------------------------------

    def disj(self) -> Formula:
        parts = [self.conj()]
        while self.at("+"):
            self.advance()
            parts.append(self.conj())
        out = parts[-1]
        for p in reversed(parts[:-1]):
            out = Disj(p, out)
        return out

    def conj(self) -> Formula:
        parts = [self.postfix()]
        while self.at("*"):
            self.advance()
            parts.append(self.postfix())
        out = parts[-1]
        for p in reversed(parts[:-1]):
            out = Conj(p, out)
        return out

    def postfix(self) -> Formula:
        f = self.atom()
        if self.at("^-1"):
            self.advance()
            return Inv(f)
        return f

    def atom(self) -> Formula:
        t = self.cur
        if t.text == "emp":
            self.advance()
            return EMP
        if t.text == "false":
            self.advance()
            return FALSE_F
        if t.text == "true":
            self.advance()
            if self.at("("):
                self.advance()
                obj = Sym(self.ident())
                self.eat(")")
                return TrueOf(obj)
            return TRUE
        if t.text == "ex":
            self.advance()
            var = self.ident("bound variable")
            self.eat(".")
            return Exists(var, self.disj())
        if t.text == "(":
            self.advance()
            f = self.disj()
            self.eat(")")
            return f
        if t.kind == "IDENT" and t.text not in KEYWORDS:
            name = self.ident()
            if self.at("("):
                self.advance()
                args = [self.term()]
                while self.at(","):
                    self.advance()
                    args.append(self.term())
                self.eat(")")
                return Call(name, tuple(args))
            return self.points_to(Sym(name))
        raise self.fail({"emp", "true", "false", "ex", "(", "identifier"})

    def points_to(self, base: Term) -> Formula:
        fields: list[str] = []
        while self.at("."):
            self.advance()
            fields.append(self.ident("field name"))
        self.eat("|->")
        rhs = self.value()
        if not fields:
            return PointsTo(base, PLAIN, rhs)
        lhs: Term = base
        for fld in fields[:-1]:
            lhs = Path(lhs, fld)
        return PointsTo(lhs, FieldLabel(fields[-1]), rhs)

    def term(self) -> Term:
        t = self.cur
        if t.text == "nil":
            self.advance()
            return NIL
        if t.kind == "INT":
            self.advance()
            return Atom(int(t.text))
        name = self.ident("term")
        out: Term = Sym(name)
        while self.at("."):
            self.advance()
            out = Path(out, self.ident("field name"))
        return out

    def value(self) -> Term:
        t = self.cur
        if t.text == "nil":
            self.advance()
            return NIL
        if t.kind == "INT":
            self.advance()
            return Atom(int(t.text))
        return Sym(self.ident("value"))


def parse_formula(text: str, first_line: int = 1) -> Formula:
    p = _Parser(tokenize(text, first_line))
    f = p.disj()
    if p.cur.kind != "EOF":
        raise p.fail({"end of input"})
    return f


def _check_closed(name: str, params: tuple[str, ...], body: Formula, line: int) -> None:
    extra = free_symbols(body) - set(params)
    if extra:
        raise UnboundSymbol(name, sorted(extra)[0], line)


def parse_def_line(line: str, lineno: int = 1) -> PredicateDef:
    """One ``def name(p1,...,pn) = <formula>`` line."""
    p = _Parser(tokenize(line, lineno))
    p.eat("def")
    name = p.ident("predicate name")
    p.eat("(")
    params: list[str] = []
    if not p.at(")"):
        params.append(p.ident("parameter"))
        while p.at(","):
            p.advance()
            params.append(p.ident("parameter"))
    p.eat(")")
    p.eat("=")
    body = p.disj()
    if p.cur.kind != "EOF":
        raise p.fail({"end of input"})
    if len(set(params)) != len(params):
        raise ParseError(f"repeated parameter in {name!r}", lineno, 1)
    _check_closed(name, tuple(params), body, lineno)
    return PredicateDef(name, tuple(params), body)


def parse_defs(text: str) -> dict[str, PredicateDef]:
    """Parse a block of definition lines; blank lines and # comments allowed."""
    defs: dict[str, PredicateDef] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        d = parse_def_line(line, lineno)
        if d.name in defs:
            raise DuplicateDefinition(d.name, lineno)
        defs[d.name] = d
    return defs


@dataclass(frozen=True)
class FormulaFile:
    """A formula file: definitions plus check/query lines, in order."""

    defs: dict[str, PredicateDef]
    queries: tuple[tuple[str, Formula], ...]  # (kind, formula), kind in {check, query}


def parse_formula_file(text: str) -> FormulaFile:
    defs: dict[str, PredicateDef] = {}
    queries: list[tuple[str, Formula]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head = line.split(None, 1)[0]
        if head == "def":
            d = parse_def_line(line, lineno)
            if d.name in defs:
                raise DuplicateDefinition(d.name, lineno)
            defs[d.name] = d
        elif head in ("check", "query"):
            rest = line[len(head):].strip()
            if not rest:
                raise ParseError(f"{head} line needs a formula", lineno, len(head) + 1)
            queries.append((head, parse_formula(rest, lineno)))
        else:
            # A bare formula line counts as a query; keeps one-off files easy.
            queries.append(("query", parse_formula(line, lineno)))
    return FormulaFile(defs, tuple(queries))
