"""Brute-force ground truth: exhaustive enumeration and random generation.

Everything here is deliberately dumb: enumerate every heap a universe
permits, every formula a pool permits, and decide equivalence by comparing
behaviour over all of them.  The rewriting layer is validated against this
module, never the other way around.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from random import Random
from typing import Iterator, Mapping, Optional, Sequence

from .heap import Atom, Edge, FieldLabel, Heap, Location, NIL, PLAIN
from .formula import (
    Call,
    Conj,
    Disj,
    EMP,
    Exists,
    FALSE_F,
    Formula,
    Inv,
    PointsTo,
    PredicateDef,
    Sym,
    TRUE,
    TrueOf,
    contains_inv,
    contains_partial,
)
from .semantics import DEFAULT_FUEL, eval_ground, match


class UniverseTooLarge(Exception):
    def __init__(self, count: int, budget: int):
        super().__init__(f"universe enumerates more than {budget} heaps (stopped at {count})")


@dataclass(frozen=True)
class UniverseSpec:
    """The finite world enumeration and ground existentials range over."""

    locations: tuple[Location, ...]
    labels: tuple[FieldLabel, ...]
    atoms: tuple[Atom, ...]
    max_edges: int

    def __post_init__(self) -> None:
        for name, xs in (("locations", self.locations), ("labels", self.labels), ("atoms", self.atoms)):
            if len(set(xs)) != len(xs):
                raise ValueError(f"duplicate entries in {name}")
        if self.max_edges < 0:
            raise ValueError("max_edges must be >= 0")

    @property
    def targets(self) -> tuple:
        return self.locations + self.atoms

    def describe(self) -> str:
        labs = ",".join("eps" if l.is_plain else l.name for l in self.labels)
        ats = ",".join("nil" if a.value is None else str(a.value) for a in self.atoms)
        locs = ",".join(l.name for l in self.locations)
        return f"locations={locs} labels={labs} atoms={ats} max_edges={self.max_edges}"


DEFAULT_UNIVERSE = UniverseSpec(
    locations=(Location("a"), Location("b"), Location("c")),
    labels=(PLAIN, FieldLabel("f"), FieldLabel("g")),
    atoms=(NIL,),
    max_edges=4,
)


def parse_universe(text: str) -> UniverseSpec:
    """Parse ``locations=a,b,c labels=eps,f,g atoms=nil max_edges=4``.

    Separators may be whitespace or semicolons; 'eps' names the plain label.
    Unlisted keys fall back to the default universe's entries.
    """
    fields = dict(
        locations=DEFAULT_UNIVERSE.locations,
        labels=DEFAULT_UNIVERSE.labels,
        atoms=DEFAULT_UNIVERSE.atoms,
        max_edges=DEFAULT_UNIVERSE.max_edges,
    )
    for part in text.replace(";", " ").split():
        if "=" not in part:
            raise ValueError(f"bad universe entry {part!r}")
        key, _, raw = part.partition("=")
        vals = [v for v in raw.split(",") if v]
        if key == "locations":
            fields["locations"] = tuple(Location(v) for v in vals)
        elif key == "labels":
            fields["labels"] = tuple(PLAIN if v == "eps" else FieldLabel(v) for v in vals)
        elif key == "atoms":
            fields["atoms"] = tuple(NIL if v == "nil" else Atom(int(v)) for v in vals)
        elif key == "max_edges":
            fields["max_edges"] = int(raw)
        else:
            raise ValueError(f"unknown universe key {key!r}")
    return UniverseSpec(**fields)


def load_universe_file(text: str) -> UniverseSpec:
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    return parse_universe(" ".join(ln for ln in lines if ln))


def location_configs(u: UniverseSpec, loc: Location) -> list[tuple[Edge, ...]]:
    """Every label-disciplined out-edge assignment one cell can carry.

    Either nothing, or one plain edge, or a nonempty partial assignment of
    the named field labels; never plain and named together.
    """
    configs: list[tuple[Edge, ...]] = [()]
    has_plain = any(l.is_plain for l in u.labels)
    named = [l for l in u.labels if not l.is_plain]
    if has_plain:
        configs.extend((Edge(loc, PLAIN, t),) for t in u.targets)
    for r in range(1, len(named) + 1):
        for labs in itertools.combinations(named, r):
            for targs in itertools.product(u.targets, repeat=r):
                configs.append(tuple(Edge(loc, lab, t) for lab, t in zip(labs, targs)))
    return configs


def enumerate_heaps(u: UniverseSpec) -> Iterator[Heap]:
    """Every source-unique, label-disciplined heap with at most max_edges
    edges over the universe, each exactly once, in a deterministic order."""
    per_loc = [location_configs(u, loc) for loc in u.locations]
    for combo in itertools.product(*per_loc):
        n = sum(len(c) for c in combo)
        if n > u.max_edges:
            continue
        yield Heap(frozenset(e for c in combo for e in c))


def model_heaps(u: UniverseSpec, budget: Optional[int] = None) -> list[Heap]:
    """Materialized enumeration, guarded by an optional size budget."""
    out: list[Heap] = []
    for h in enumerate_heaps(u):
        out.append(h)
        if budget is not None and len(out) > budget:
            raise UniverseTooLarge(len(out), budget)
    return out


def random_heap(u: UniverseSpec, seed: int) -> Heap:
    """A deterministic sample; always label-disciplined and source-unique."""
    rng = Random(seed)
    per_loc = [location_configs(u, loc) for loc in u.locations]
    for _ in range(64):
        combo = [rng.choice(cs) for cs in per_loc]
        if sum(len(c) for c in combo) <= u.max_edges:
            return Heap(frozenset(e for c in combo for e in c))
    # pathological max_edges: drop cells until the bound holds
    while combo and sum(len(c) for c in combo) > u.max_edges:
        combo.pop()
    return Heap(frozenset(e for c in combo for e in c))


# --- formula generation ---------------------------------------------------


def default_formula_leaves() -> list[Formula]:
    """The pinned atomic pool the exhaustive law checks enumerate over.

    Covers all constructors over symbols a, b, c: constants, one absorber,
    chainable cells, a self-loop, an atom target, and a named field.
    """
    a, b, c = Sym("a"), Sym("b"), Sym("c")
    return [
        EMP,
        TRUE,
        FALSE_F,
        TrueOf(a),
        PointsTo(a, PLAIN, b),
        PointsTo(b, PLAIN, c),
        PointsTo(a, PLAIN, a),
        PointsTo(b, PLAIN, NIL),
        PointsTo(a, FieldLabel("f"), b),
    ]


def enumerate_formulas(
    max_size: int,
    leaves: Optional[Sequence[Formula]] = None,
    ex_vars: Sequence[str] = ("b",),
    include_inv: bool = True,
) -> Iterator[Formula]:
    """All ASTs up to the node-count bound over the leaf pool."""
    pool = list(leaves) if leaves is not None else default_formula_leaves()
    by_size: list[list[Formula]] = [[], list(pool)]
    yield from by_size[1]
    for n in range(2, max_size + 1):
        level: list[Formula] = []
        for f in by_size[n - 1]:
            if include_inv:
                level.append(Inv(f))
            for v in ex_vars:
                level.append(Exists(v, f))
        for i in range(1, n - 1):
            j = n - 1 - i
            for l in by_size[i]:
                for r in by_size[j]:
                    level.append(Conj(l, r))
                    level.append(Disj(l, r))
        by_size.append(level)
        yield from level


def random_formula(
    rng: Random,
    size: int,
    syms: Sequence[str] = ("a", "b", "c"),
    fields: Sequence[str] = ("f", "g"),
) -> Formula:
    """A random AST with roughly `size` nodes, deterministic per rng state."""
    if size <= 1:
        r = rng.random()
        if r < 0.12:
            return EMP
        if r < 0.20:
            return TRUE
        if r < 0.26:
            return FALSE_F
        if r < 0.36:
            return TrueOf(Sym(rng.choice(syms)))
        lhs = Sym(rng.choice(syms))
        label = PLAIN if rng.random() < 0.6 else FieldLabel(rng.choice(fields))
        rv = rng.random()
        rhs = NIL if rv < 0.25 else Sym(rng.choice(syms))
        return PointsTo(lhs, label, rhs)
    r = rng.random()
    if r < 0.12:
        return Inv(random_formula(rng, size - 1, syms, fields))
    if r < 0.24:
        return Exists(rng.choice(syms), random_formula(rng, size - 1, syms, fields))
    split = rng.randint(1, size - 2) if size > 2 else 1
    left = random_formula(rng, split, syms, fields)
    right = random_formula(rng, size - 1 - split, syms, fields)
    return Conj(left, right) if rng.random() < 0.5 else Disj(left, right)


# --- definitional equivalence ----------------------------------------------


def _reachable_bodies(f: Formula, defs: Mapping[str, PredicateDef]) -> list[Formula]:
    out = [f]
    seen: set[str] = set()
    todo = list({g.pred for g in _calls(f)})
    while todo:
        name = todo.pop()
        if name in seen or name not in defs:
            continue
        seen.add(name)
        body = defs[name].body
        out.append(body)
        todo.extend({g.pred for g in _calls(body)})
    return out


def _calls(f: Formula):
    from .formula import subformulas

    return [g for g in subformulas(f) if isinstance(g, Call)]


def is_matchable(f: Formula, defs: Optional[Mapping[str, PredicateDef]] = None) -> bool:
    return not any(contains_inv(g) for g in _reachable_bodies(f, defs or {}))


def _has_call_cycle(f: Formula, defs: Mapping[str, PredicateDef]) -> bool:
    graph: dict[str, set[str]] = {}
    roots = {g.pred for g in _calls(f)}
    todo = list(roots)
    while todo:
        name = todo.pop()
        if name in graph or name not in defs:
            continue
        graph[name] = {g.pred for g in _calls(defs[name].body)}
        todo.extend(graph[name])
    state: dict[str, int] = {}

    def visit(name: str) -> bool:
        if name not in graph:
            return False
        if state.get(name) == 1:
            return True
        if state.get(name) == 2:
            return False
        state[name] = 1
        if any(visit(m) for m in graph[name]):
            return True
        state[name] = 2
        return False

    return any(visit(r) for r in roots)


def is_evaluable(f: Formula, defs: Optional[Mapping[str, PredicateDef]] = None) -> bool:
    """Evaluation needs absorber-free formulas and terminating unfolding: a
    recursive predicate denotes a set of heaps, not one value."""
    defs = defs or {}
    if any(contains_partial(g) for g in _reachable_bodies(f, defs)):
        return False
    return not _has_call_cycle(f, defs)


def match_profile(
    f: Formula,
    heaps: Sequence[Heap],
    defs: Optional[Mapping[str, PredicateDef]] = None,
    fuel: int = DEFAULT_FUEL,
) -> tuple[frozenset, ...]:
    """Per-heap sets of binding environments; the observable behaviour."""
    return tuple(
        frozenset(b.env for b in match(f, h, defs=defs, fuel=fuel)) for h in heaps
    )


def oracle_equiv(
    f1: Formula,
    f2: Formula,
    u: UniverseSpec,
    defs: Optional[Mapping[str, PredicateDef]] = None,
    fuel: int = DEFAULT_FUEL,
    budget: int = 200_000,
    heaps: Optional[Sequence[Heap]] = None,
) -> bool:
    """Definitional equivalence by exhaustive comparison.

    Inv-free formulas are compared by match behaviour over every enumerated
    heap; absorber-free formulas by their evaluation result.  When both
    readings apply, both must agree.  Formulas with no common reading are
    never equivalent.  Pass `heaps` to reuse a materialized enumeration.
    """
    routes = 0
    if is_evaluable(f1, defs) and is_evaluable(f2, defs):
        locs = u.locations
        if eval_ground(f1, defs, fuel, locs) != eval_ground(f2, defs, fuel, locs):
            return False
        routes += 1
    if is_matchable(f1, defs) and is_matchable(f2, defs):
        hs = heaps if heaps is not None else model_heaps(u, budget)
        for h in hs:
            s1 = frozenset(b.env for b in match(f1, h, defs=defs, fuel=fuel))
            s2 = frozenset(b.env for b in match(f2, h, defs=defs, fuel=fuel))
            if s1 != s2:
                return False
        routes += 1
    return routes > 0
