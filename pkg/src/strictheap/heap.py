"""Concrete heap graphs: locations, labeled points-to edges, and stacks.

A heap is a finite set of edges ``source -[label]-> target``.  Sources are
always locations; targets are locations or atoms (nil or an integer).  Atoms
are not graph vertices, so two cells that both point at nil do not thereby
touch.  A cell either carries the plain pointer label or named field labels,
never both, and no cell is assigned twice: these two rules are what make an
edge set a heap rather than an arbitrary labeled relation.

Heap values are immutable and hashable.  Well-formedness is checked by
``validate_heap`` instead of being baked into the type, because algebraic
intermediate results legitimately pass through ill-formed states.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Optional, Union


@dataclass(frozen=True)
class Location:
    """A symbolic memory cell name.  Equal iff the names are equal."""

    name: str

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("location name must be non-empty")

    def __repr__(self) -> str:
        return f"Location({self.name!r})"


@dataclass(frozen=True)
class Atom:
    """A non-address value: nil (represented by None) or an integer."""

    value: Optional[int]

    def __repr__(self) -> str:
        return "Atom(nil)" if self.value is None else f"Atom({self.value})"


NIL = Atom(None)

Value = Union[Location, Atom]


@dataclass(frozen=True)
class FieldLabel:
    """An edge label: a named object field, or the reserved plain label.

    The plain label (empty name) marks an ordinary pointer cell; it is
    distinct from every field identifier, which must be non-empty.
    """

    name: str

    @property
    def is_plain(self) -> bool:
        return self.name == ""

    def __repr__(self) -> str:
        return "PLAIN" if self.is_plain else f"FieldLabel({self.name!r})"


PLAIN = FieldLabel("")


@dataclass(frozen=True)
class Edge:
    source: Location
    label: FieldLabel
    target: Value

    def __repr__(self) -> str:
        return f"Edge({format_edge(self)})"


def value_key(v: Value) -> tuple:
    """Stable sort key over the Location/Atom union."""
    if isinstance(v, Location):
        return (0, v.name)
    return (1, "" if v.value is None else str(v.value).rjust(20, "0"))


def edge_key(e: Edge) -> tuple:
    return (e.source.name, e.label.name, value_key(e.target))


def format_value(v: Value) -> str:
    if isinstance(v, Location):
        return v.name
    return "nil" if v.value is None else str(v.value)


def format_edge(e: Edge) -> str:
    if e.label.is_plain:
        return f"{e.source.name} -> {format_value(e.target)}"
    return f"{e.source.name} .{e.label.name} -> {format_value(e.target)}"


@dataclass(frozen=True)
class Heap:
    """A finite set of edges.  Construct with :func:`heap_of` or ``Heap.of``."""

    edges: frozenset[Edge]

    @classmethod
    def of(cls, edges: Iterable[Edge] = ()) -> "Heap":
        return cls(frozenset(edges))

    @cached_property
    def vertices(self) -> frozenset[Location]:
        """All sources plus all location-valued targets.  Atoms are excluded."""
        verts = set()
        for e in self.edges:
            verts.add(e.source)
            if isinstance(e.target, Location):
                verts.add(e.target)
        return frozenset(verts)

    @property
    def is_empty(self) -> bool:
        return not self.edges

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges, key=edge_key)

    def without(self, e: Edge) -> "Heap":
        return Heap(self.edges - {e})

    def source_conflicts(self) -> list[tuple[Location, FieldLabel]]:
        """(source, label) pairs assigned by more than one edge."""
        seen: dict[tuple[Location, FieldLabel], int] = {}
        for e in self.edges:
            seen[(e.source, e.label)] = seen.get((e.source, e.label), 0) + 1
        return sorted(
            (k for k, n in seen.items() if n > 1),
            key=lambda k: (k[0].name, k[1].name),
        )

    def label_conflicts(self) -> list[Location]:
        """Sources carrying both a plain edge and a named-field edge."""
        plain = {e.source for e in self.edges if e.label.is_plain}
        named = {e.source for e in self.edges if not e.label.is_plain}
        return sorted(plain & named, key=lambda loc: loc.name)

    def is_wellformed(self) -> bool:
        return not self.source_conflicts() and not self.label_conflicts()

    def __len__(self) -> int:
        return len(self.edges)

    def __iter__(self) -> Iterator[Edge]:
        return iter(self.sorted_edges())

    def __repr__(self) -> str:
        return f"Heap({format_heap(self)})"


EMPTY_HEAP = Heap(frozenset())


def heap_of(edges: Iterable[Edge]) -> Heap:
    return Heap(frozenset(edges))


def format_heap(h: Heap) -> str:
    if h.is_empty:
        return "emp"
    return "{" + ", ".join(format_edge(e) for e in h.sorted_edges()) + "}"


@dataclass(frozen=True, eq=True)
class StackEnv:
    """Program-variable roots: a finite map from variable name to location."""

    roots: tuple[tuple[str, Location], ...]

    @classmethod
    def of(cls, mapping: Mapping[str, Location] | Iterable[tuple[str, Location]] = ()) -> "StackEnv":
        items = mapping.items() if isinstance(mapping, Mapping) else mapping
        return cls(tuple(sorted(items)))

    def as_dict(self) -> dict[str, Location]:
        return dict(self.roots)

    @property
    def locations(self) -> frozenset[Location]:
        return frozenset(loc for _, loc in self.roots)

    def __len__(self) -> int:
        return len(self.roots)


EMPTY_STACK = StackEnv(())


@dataclass(frozen=True)
class Violation:
    """One well-formedness or rooting problem found by validate_heap."""

    kind: str  # duplicate-cell | mixed-labels | unreachable | unrooted-component
    detail: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.detail}"


def successors(h: Heap, loc: Location) -> list[Location]:
    return [e.target for e in h.edges if e.source == loc and isinstance(e.target, Location)]


def reachable_from(h: Heap, starts: Iterable[Location]) -> frozenset[Location]:
    """Directed closure over edges, starting from the given locations."""
    seen: set[Location] = set()
    todo = [loc for loc in starts]
    while todo:
        loc = todo.pop()
        if loc in seen:
            continue
        seen.add(loc)
        todo.extend(successors(h, loc))
    return frozenset(seen)


def components(h: Heap) -> list[Heap]:
    """Split a heap into maximal undirected-connected edge groups.

    Edges touch iff they share a location vertex; atom targets never connect
    anything.  The union of the result is the input and the groups are
    pairwise vertex-disjoint.  Deterministic order (by least edge).
    """
    parent: dict[Location, Location] = {}

    def find(x: Location) -> Location:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a: Location, b: Location) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    for v in h.vertices:
        parent[v] = v
    for e in h.edges:
        if isinstance(e.target, Location):
            union(e.source, e.target)

    groups: dict[Location, set[Edge]] = {}
    for e in h.edges:
        groups.setdefault(find(e.source), set()).add(e)
    comps = [Heap(frozenset(g)) for g in groups.values()]
    comps.sort(key=lambda c: edge_key(c.sorted_edges()[0]))
    return comps


def validate_heap(h: Heap, s: StackEnv = EMPTY_STACK) -> list[Violation]:
    """Report everything wrong with a heap relative to a stack.

    Four kinds of report: a cell assigned twice, a cell mixing the plain
    pointer label with field labels, a vertex no directed path from any stack
    root reaches, and a whole component containing no stack root at all.
    An empty report means the heap is a valid, fully rooted model.
    """
    report: list[Violation] = []
    for src, label in h.source_conflicts():
        what = "plain cell" if label.is_plain else f"field .{label.name}"
        report.append(Violation("duplicate-cell", f"{src.name} assigns {what} more than once"))
    for src in h.label_conflicts():
        report.append(
            Violation("mixed-labels", f"{src.name} has both a plain edge and field edges")
        )

    roots = [loc for _, loc in s.roots]
    live = reachable_from(h, roots)
    for v in sorted(h.vertices, key=lambda loc: loc.name):
        if v not in live:
            report.append(Violation("unreachable", f"{v.name} is not reachable from any stack root"))
    root_set = set(roots)
    for comp in components(h):
        if not (set(comp.vertices) & root_set):
            report.append(
                Violation(
                    "unrooted-component",
                    f"component {format_heap(comp)} contains no stack root",
                )
            )
    return report


# --- heap model text format ---------------------------------------------
#
# One entry per line:
#   stack <var> -> <loc>
#   <loc> -> <val>
#   <loc> .<field> -> <val>
# '#' starts a comment; blank lines are ignored.


class HeapFormatError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


_IDENT_OK = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_")


def _is_ident(s: str) -> bool:
    return bool(s) and not s[0].isdigit() and all(c in _IDENT_OK for c in s)


def _parse_value(tok: str, line: int) -> Value:
    if tok == "nil":
        return NIL
    if tok.lstrip("-").isdigit():
        return Atom(int(tok))
    if _is_ident(tok):
        return Location(tok)
    raise HeapFormatError(f"bad value {tok!r}", line)


def parse_heap_text(text: str) -> tuple[Heap, StackEnv]:
    edges: set[Edge] = set()
    roots: list[tuple[str, Location]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "stack":
            if len(parts) != 4 or parts[2] != "->" or not _is_ident(parts[1]) or not _is_ident(parts[3]):
                raise HeapFormatError("expected 'stack <var> -> <loc>'", lineno)
            roots.append((parts[1], Location(parts[3])))
        elif len(parts) == 3 and parts[1] == "->":
            if not _is_ident(parts[0]):
                raise HeapFormatError(f"bad location {parts[0]!r}", lineno)
            edges.add(Edge(Location(parts[0]), PLAIN, _parse_value(parts[2], lineno)))
        elif len(parts) == 4 and parts[2] == "->" and parts[1].startswith("."):
            field = parts[1][1:]
            if not _is_ident(parts[0]) or not _is_ident(field):
                raise HeapFormatError("expected '<loc> .<field> -> <val>'", lineno)
            edges.add(Edge(Location(parts[0]), FieldLabel(field), _parse_value(parts[3], lineno)))
        else:
            raise HeapFormatError(f"unrecognized entry {line!r}", lineno)
    return Heap(frozenset(edges)), StackEnv.of(roots)


def format_heap_text(h: Heap, s: StackEnv = EMPTY_STACK) -> str:
    lines = [f"stack {var} -> {loc.name}" for var, loc in s.roots]
    lines.extend(format_edge(e) for e in h.sorted_edges())
    return "\n".join(lines) + ("\n" if lines else "")
