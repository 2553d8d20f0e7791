"""Symbolic rewriting: inversion push-down, normalization, bridge splitting,
equivalence, and the sub-heap order.

The normalizer is deliberately conservative: every rewrite it applies is
sound for both readings of a formula (evaluation and matching), which is
what lets equivalence use syntactic equality of normal forms as a fast
path.  Rules that only hold for one reading (dropping emp from a `+` chain,
absorbing false through `+`) are not applied.
"""

from __future__ import annotations

from typing import Mapping, Optional

from .heap import Atom, Edge, Heap, Location, components
from .formula import (
    Call,
    Conj,
    Disj,
    EMP,
    Emp,
    Exists,
    FALSE_F,
    FalseHeap,
    Formula,
    Inv,
    PointsTo,
    PredicateDef,
    Sym,
    Term,
    TrueOf,
    conj_of,
    conj_operands,
    contains_partial,
    disj_of,
    disj_operands,
    print_formula,
)
from .oracle import UniverseSpec, is_evaluable, is_matchable, model_heaps, oracle_equiv
from .semantics import DEFAULT_FUEL, eval_ground, format_result, match


class EdgeNotPresent(Exception):
    def __init__(self, e: Edge):
        super().__init__(f"edge {e!r} is not in the heap")


def push_inversion(f: Formula) -> Formula:
    """Drive every inversion down to a points-to or predicate call.

    emp and false are their own inverses; inversion distributes over both
    connectives, hops through existentials, and cancels with itself.
    """
    if isinstance(f, Inv):
        body = f.body
        if isinstance(body, Emp):
            return EMP
        if isinstance(body, FalseHeap):
            return FALSE_F
        if isinstance(body, Inv):
            return push_inversion(body.body)
        if isinstance(body, Conj):
            return Conj(push_inversion(Inv(body.left)), push_inversion(Inv(body.right)))
        if isinstance(body, Disj):
            return Disj(push_inversion(Inv(body.left)), push_inversion(Inv(body.right)))
        if isinstance(body, Exists):
            return Exists(body.var, push_inversion(Inv(body.body)))
        # points-to and calls are the leaves inversion settles on; the
        # absorbers have no inverse form and stay wrapped as written
        return f
    if isinstance(f, Conj):
        return Conj(push_inversion(f.left), push_inversion(f.right))
    if isinstance(f, Disj):
        return Disj(push_inversion(f.left), push_inversion(f.right))
    if isinstance(f, Exists):
        return Exists(f.var, push_inversion(f.body))
    return f


def _sortable(ops: list[Formula]) -> bool:
    """Absorbers make `*`/`+` chains order-sensitive; leave those alone."""
    return not any(contains_partial(op) for op in ops)


def _normalize_conj(ops: list[Formula]) -> Formula:
    ops = [op for op in ops if not isinstance(op, Emp)]
    if any(isinstance(op, FalseHeap) for op in ops):
        return FALSE_F
    # cancel inverse pairs anywhere in the chain
    changed = True
    while changed:
        changed = False
        for i in range(len(ops)):
            for j in range(len(ops)):
                if i != j and ops[j] == Inv(ops[i]):
                    ops = [op for k, op in enumerate(ops) if k not in (i, j)]
                    changed = True
                    break
            if changed:
                break
    # a repeated absorber for the same object takes nothing the second time
    seen_true: set[Formula] = set()
    kept: list[Formula] = []
    for op in ops:
        if isinstance(op, TrueOf):
            if op in seen_true:
                continue
            seen_true.add(op)
        kept.append(op)
    ops = kept
    if not ops:
        return EMP
    if _sortable(ops):
        ops = sorted(ops, key=print_formula)
    return conj_of(ops)


def _normalize_disj(ops: list[Formula]) -> Formula:
    # emp is not deleted and false does not absorb here: a `+` branch can be
    # taken alone when matching, so both rewrites would change match behaviour
    if _sortable(ops):
        ops = sorted(ops, key=print_formula)
    return disj_of(ops)


def _normalize(f: Formula) -> Formula:
    if isinstance(f, Conj):
        ops = [op for g in conj_operands(f) for op in conj_operands(_normalize(g))]
        return _normalize_conj(ops)
    if isinstance(f, Disj):
        ops = [op for g in disj_operands(f) for op in disj_operands(_normalize(g))]
        return _normalize_disj(ops)
    if isinstance(f, Exists):
        return Exists(f.var, _normalize(f.body))
    if isinstance(f, Inv):
        return Inv(_normalize(f.body))
    return f


def normalize(f: Formula) -> Formula:
    """Canonical form: inversions at the leaves, identities gone, inverse
    pairs cancelled, duplicate absorbers collapsed, sortable chains sorted.
    Idempotent; never rewrites a connection into an independence."""
    return _normalize(push_inversion(f))


def _term_of(v) -> Term:
    return Sym(v.name) if isinstance(v, Location) else v


def edge_formula(e: Edge) -> PointsTo:
    return PointsTo(Sym(e.source.name), e.label, _term_of(e.target))


def heap_formula(h: Heap) -> Formula:
    """The connection form of a concrete heap (emp when empty)."""
    return conj_of([edge_formula(e) for e in h.sorted_edges()])


def subtract_edge(h: Heap, e: Edge) -> Formula:
    """Remove one edge and say what is left, as a formula.

    Removing a bridge disconnects the remainder, and a disconnected remainder
    is only expressible as an independence of its components; otherwise the
    remainder stays one connection chain.
    """
    if e not in h.edges:
        raise EdgeNotPresent(e)
    rest = h.without(e)
    if rest.is_empty:
        return EMP
    comps = components(rest)
    if len(comps) == 1:
        return heap_formula(rest)
    return disj_of([heap_formula(c) for c in comps])


def leq(h1: Heap, h2: Heap) -> bool:
    """Sub-heap order: every cell of h1 is a cell of h2."""
    return h1.edges <= h2.edges


def top_heap(u: UniverseSpec, target: Optional[Location] = None) -> Heap:
    """The edge-count-maximal heap over a universe: every cell carries every
    named field (or its plain edge when no named labels exist), all aimed at
    one target.  Maximal in edge count, not a subset-maximum: full heaps with
    different targets are incomparable."""
    if not u.locations:
        return Heap(frozenset())
    tgt: Atom | Location = target if target is not None else u.locations[0]
    named = [l for l in u.labels if not l.is_plain]
    plain = next((l for l in u.labels if l.is_plain), None)
    edges = []
    for loc in u.locations:
        if named:
            edges.extend(Edge(loc, lab, tgt) for lab in named)
        elif plain is not None:
            edges.append(Edge(loc, plain, tgt))
    return Heap(frozenset(edges))


def equivalent(
    f1: Formula,
    f2: Formula,
    universe: UniverseSpec,
    defs: Optional[Mapping[str, PredicateDef]] = None,
    fuel: int = DEFAULT_FUEL,
    budget: int = 200_000,
) -> bool:
    """Equivalence decision: equal normal forms prove it; otherwise fall back
    to exhaustive model comparison.  Unequal normal forms are never reported
    as inequivalence on their own (the rewrite system is not complete)."""
    if normalize(f1) == normalize(f2):
        return True
    return oracle_equiv(f1, f2, universe, defs=defs, fuel=fuel, budget=budget)


def equivalent_with_witness(
    f1: Formula,
    f2: Formula,
    universe: UniverseSpec,
    defs: Optional[Mapping[str, PredicateDef]] = None,
    fuel: int = DEFAULT_FUEL,
    budget: int = 200_000,
) -> tuple[bool, Optional[Heap], str]:
    """Like `equivalent`, but on inequivalence reports a distinguishing heap
    (for the match reading) or an evaluation mismatch description."""
    if normalize(f1) == normalize(f2):
        return True, None, "equal normal forms"
    routes = 0
    # match route first: a distinguishing heap is the useful counterexample
    if is_matchable(f1, defs) and is_matchable(f2, defs):
        for h in model_heaps(universe, budget):
            s1 = frozenset(b.env for b in match(f1, h, defs=defs, fuel=fuel))
            s2 = frozenset(b.env for b in match(f2, h, defs=defs, fuel=fuel))
            if s1 != s2:
                return False, h, "match behaviour differs on the witness heap"
        routes += 1
    if is_evaluable(f1, defs) and is_evaluable(f2, defs):
        r1 = eval_ground(f1, defs, fuel, universe.locations)
        r2 = eval_ground(f2, defs, fuel, universe.locations)
        if r1 != r2:
            return False, None, f"evaluation differs: {format_result(r1)} vs {format_result(r2)}"
        routes += 1
    if routes == 0:
        return False, None, "no common reading (one side is match-only, the other evaluation-only)"
    return True, None, "agree on all enumerated models"
