"""Heap formula AST, predicate definitions, and the printer.

Surface syntax (see parser): ``*`` is the strict connecting conjunction,
``+`` the independence disjunction, ``^-1`` postfix inversion, ``ex v .``
the existential, ``emp``/``true``/``true(a)``/``false`` the constants, and
``a.f1.f2 |-> x`` a points-to over a field path.  ``*`` binds tighter than
``+``.  Field paths stay sugared in the AST (the printer reproduces the
source form); the semantics layer desugars them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping, Optional, Union

from .heap import Atom, FieldLabel, PLAIN

# --- terms ----------------------------------------------------------------


@dataclass(frozen=True)
class Sym:
    """A symbol: a stack variable, bound variable, or literal location name."""

    name: str


@dataclass(frozen=True)
class Path:
    """Left-associated field access: a.f1.f2 is Path(Path(Sym a, f1), f2)."""

    base: "Term"
    field: str


Term = Union[Sym, Atom, Path]


def term_symbols(t: Term) -> frozenset[str]:
    if isinstance(t, Sym):
        return frozenset({t.name})
    if isinstance(t, Path):
        return term_symbols(t.base)
    return frozenset()


def format_term(t: Term) -> str:
    if isinstance(t, Sym):
        return t.name
    if isinstance(t, Atom):
        return "nil" if t.value is None else str(t.value)
    return f"{format_term(t.base)}.{t.field}"


# --- formulas ---------------------------------------------------------------


@dataclass(frozen=True)
class Emp:
    pass


@dataclass(frozen=True)
class TrueAny:
    """Matches any heap: absorbs every not-yet-claimed cell."""

    pass


@dataclass(frozen=True)
class TrueOf:
    """Absorbs every not-yet-claimed field of one object."""

    obj: Term


@dataclass(frozen=True)
class FalseHeap:
    pass


@dataclass(frozen=True)
class PointsTo:
    """One cell: ``lhs`` (possibly a field path) holds ``rhs`` under ``label``.

    ``a |-> b`` is PointsTo(Sym a, PLAIN, Sym b); ``a.f |-> b`` puts f in the
    label; for longer paths the prefix stays in ``lhs`` as a Path.
    """

    lhs: Term
    label: FieldLabel
    rhs: Term


@dataclass(frozen=True)
class Conj:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Disj:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Inv:
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Call:
    pred: str
    args: tuple[Term, ...]


Formula = Union[Emp, TrueAny, TrueOf, FalseHeap, PointsTo, Conj, Disj, Inv, Exists, Call]

EMP = Emp()
TRUE = TrueAny()
FALSE_F = FalseHeap()


@dataclass(frozen=True)
class PredicateDef:
    name: str
    params: tuple[str, ...]
    body: Formula


# --- traversal helpers ------------------------------------------------------


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, (Conj, Disj)):
        yield from subformulas(f.left)
        yield from subformulas(f.right)
    elif isinstance(f, (Inv, Exists)):
        yield from subformulas(f.body)


def formula_size(f: Formula) -> int:
    """Number of Formula nodes (terms do not count)."""
    return sum(1 for _ in subformulas(f))


def contains_inv(f: Formula) -> bool:
    return any(isinstance(g, Inv) for g in subformulas(f))


def contains_partial(f: Formula) -> bool:
    """Whether f uses the match-only constants true / true(a)."""
    return any(isinstance(g, (TrueAny, TrueOf)) for g in subformulas(f))


def called_predicates(f: Formula) -> frozenset[str]:
    return frozenset(g.pred for g in subformulas(f) if isinstance(g, Call))


def free_symbols(f: Formula) -> frozenset[str]:
    """Symbols not bound by any enclosing existential."""
    if isinstance(f, (Emp, TrueAny, FalseHeap)):
        return frozenset()
    if isinstance(f, TrueOf):
        return term_symbols(f.obj)
    if isinstance(f, PointsTo):
        return term_symbols(f.lhs) | term_symbols(f.rhs)
    if isinstance(f, (Conj, Disj)):
        return free_symbols(f.left) | free_symbols(f.right)
    if isinstance(f, Inv):
        return free_symbols(f.body)
    if isinstance(f, Exists):
        return free_symbols(f.body) - {f.var}
    if isinstance(f, Call):
        out: frozenset[str] = frozenset()
        for a in f.args:
            out |= term_symbols(a)
        return out
    raise TypeError(f"not a formula: {f!r}")


def all_symbols(f: Formula) -> frozenset[str]:
    """Every symbol occurring in f, bound or free, including binders."""
    out: set[str] = set()
    for g in subformulas(f):
        if isinstance(g, TrueOf):
            out |= term_symbols(g.obj)
        elif isinstance(g, PointsTo):
            out |= term_symbols(g.lhs) | term_symbols(g.rhs)
        elif isinstance(g, Exists):
            out.add(g.var)
        elif isinstance(g, Call):
            for a in g.args:
                out |= term_symbols(a)
    return frozenset(out)


def conj_operands(f: Formula) -> list[Formula]:
    """Flatten a maximal ``*`` tree into its operand list, left to right."""
    if isinstance(f, Conj):
        return conj_operands(f.left) + conj_operands(f.right)
    return [f]


def disj_operands(f: Formula) -> list[Formula]:
    if isinstance(f, Disj):
        return disj_operands(f.left) + disj_operands(f.right)
    return [f]


def conj_of(ops: list[Formula]) -> Formula:
    """Right-nested ``*`` chain; empty list is emp."""
    if not ops:
        return EMP
    out = ops[-1]
    for op in reversed(ops[:-1]):
        out = Conj(op, out)
    return out


def disj_of(ops: list[Formula]) -> Formula:
    if not ops:
        raise ValueError("empty + chain")
    out = ops[-1]
    for op in reversed(ops[:-1]):
        out = Disj(op, out)
    return out


def subst_term(t: Term, env: Mapping[str, Term]) -> Term:
    if isinstance(t, Sym):
        return env.get(t.name, t)
    if isinstance(t, Path):
        return Path(subst_term(t.base, env), t.field)
    return t


def _fresh_name(base: str, used: frozenset[str]) -> str:
    i = 1
    while f"{base}{i}" in used:
        i += 1
    return f"{base}{i}"


def subst_formula(f: Formula, env: Mapping[str, Term], used: Optional[frozenset[str]] = None) -> Formula:
    """Capture-avoiding substitution of terms for free symbols."""
    if not env:
        return f
    if used is None:
        used = all_symbols(f)
        for t in env.values():
            used |= term_symbols(t)
    if isinstance(f, (Emp, TrueAny, FalseHeap)):
        return f
    if isinstance(f, TrueOf):
        return TrueOf(subst_term(f.obj, env))
    if isinstance(f, PointsTo):
        return PointsTo(subst_term(f.lhs, env), f.label, subst_term(f.rhs, env))
    if isinstance(f, Conj):
        return Conj(subst_formula(f.left, env, used), subst_formula(f.right, env, used))
    if isinstance(f, Disj):
        return Disj(subst_formula(f.left, env, used), subst_formula(f.right, env, used))
    if isinstance(f, Inv):
        return Inv(subst_formula(f.body, env, used))
    if isinstance(f, Exists):
        inner = {k: v for k, v in env.items() if k != f.var}
        clash = any(f.var in term_symbols(t) for t in inner.values())
        if clash:
            renamed = _fresh_name(f.var, used)
            body = subst_formula(f.body, {f.var: Sym(renamed)}, used | {renamed})
            return Exists(renamed, subst_formula(body, inner, used | {renamed}))
        if not inner:
            return f
        return Exists(f.var, subst_formula(f.body, inner, used))
    if isinstance(f, Call):
        return Call(f.pred, tuple(subst_term(a, env) for a in f.args))
    raise TypeError(f"not a formula: {f!r}")


# --- printer ----------------------------------------------------------------

_PREC_DISJ = 1
_PREC_CONJ = 2
_PREC_ATOM = 3


def print_formula(f: Formula) -> str:
    """Render with minimal parentheses; parse_formula round-trips the result."""
    return _print(f, _PREC_DISJ, tail=True)


def _print(f: Formula, prec: int, tail: bool) -> str:
    if isinstance(f, Emp):
        return "emp"
    if isinstance(f, TrueAny):
        return "true"
    if isinstance(f, TrueOf):
        return f"true({format_term(f.obj)})"
    if isinstance(f, FalseHeap):
        return "false"
    if isinstance(f, PointsTo):
        lhs = format_term(f.lhs)
        if not f.label.is_plain:
            lhs = f"{lhs}.{f.label.name}"
        return f"{lhs} |-> {format_term(f.rhs)}"
    if isinstance(f, Call):
        return f"{f.pred}({', '.join(format_term(a) for a in f.args)})"
    if isinstance(f, Inv):
        if isinstance(f.body, (Emp, TrueAny, FalseHeap, Call, TrueOf)):
            return f"{_print(f.body, _PREC_ATOM, tail=False)}^-1"
        return f"({_print(f.body, _PREC_DISJ, tail=False)})^-1"
    if isinstance(f, Exists):
        # An existential swallows everything to its right, so it can stay
        # bare only where the expression ends anyway.
        body = f"ex {f.var} . {_print(f.body, _PREC_DISJ, tail=True)}"
        return body if tail else f"({body})"
    if isinstance(f, Conj):
        left = _print(f.left, _PREC_ATOM, tail=False)
        right = _print(f.right, _PREC_CONJ, tail=tail)
        out = f"{left} * {right}"
        return out if prec <= _PREC_CONJ else f"({out})"
    if isinstance(f, Disj):
        left = _print(f.left, _PREC_CONJ, tail=False)
        right = _print(f.right, _PREC_DISJ, tail=tail)
        out = f"{left} + {right}"
        return out if prec <= _PREC_DISJ else f"({out})"
    raise TypeError(f"not a formula: {f!r}")
