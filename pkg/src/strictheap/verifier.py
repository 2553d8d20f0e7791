"""Frame rule support: split a call-site heap into footprint and frame,
apply a procedure contract, and keep inversion out of contracts entirely.

A contract verified on its footprint can run inside a larger heap as long
as the rest (the frame) is independent of the footprint, i.e. shares no
vertex with it.  Inverted terms are rejected at load time: cancellation can
leave vertices that the frame still uses, so contracts with inversions
give no framing guarantee.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Mapping, Optional

from .heap import EMPTY_STACK, Heap, Location, StackEnv, edge_key, value_key
from .formula import (
    Conj,
    Disj,
    Exists,
    Formula,
    PredicateDef,
    Sym,
    contains_inv,
    contains_partial,
    free_symbols,
    subst_formula,
)
from .parser import ParseError, parse_formula
from .semantics import (
    Binding,
    DEFAULT_FUEL,
    FALSE,
    SignedHeap,
    disjoin,
    eval_ground,
    match,
)


class InversionInSpec(Exception):
    def __init__(self, name: str):
        super().__init__(f"contract {name!r} contains an inverted term; framing is not sound for it")
        self.name = name


class FreshLocationExhausted(Exception):
    pass


class VerificationFailure(Exception):
    def __init__(self, cause: str):
        super().__init__(cause)
        self.cause = cause


@dataclass(frozen=True)
class Spec:
    """A procedure contract: run on a heap matching `pre`, leave `post`."""

    name: str
    pre: Formula
    post: Formula

    def __post_init__(self) -> None:
        if contains_inv(self.pre) or contains_inv(self.post):
            raise InversionInSpec(self.name)


_SPEC_LINE = re.compile(r"^spec\s+(\w+)\s*:\s*\{(.*)\}\s*->\s*\{(.*)\}\s*$")


def parse_spec_file(text: str) -> dict[str, Spec]:
    """Lines of ``spec name: {<formula>} -> {<formula>}``; # comments."""
    specs: dict[str, Spec] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _SPEC_LINE.match(line)
        if m is None:
            raise ParseError(f"bad contract line {line!r}", lineno, 1, frozenset({"spec name: {pre} -> {post}"}))
        name, pre_txt, post_txt = m.groups()
        if name in specs:
            raise ParseError(f"contract {name!r} defined twice", lineno, 1)
        specs[name] = Spec(name, parse_formula(pre_txt, lineno), parse_formula(post_txt, lineno))
    return specs


@dataclass(frozen=True)
class FrameSplit:
    binding: Binding
    footprint: Heap
    frame: Heap


def frame_split(
    h: Heap,
    p: Formula,
    s: StackEnv = EMPTY_STACK,
    defs: Optional[Mapping[str, PredicateDef]] = None,
    fuel: int = DEFAULT_FUEL,
) -> Optional[FrameSplit]:
    """Find a sub-heap satisfying p whose leftover is independent of it.

    Returns the split with the smallest footprint (ties broken by edge
    order, then binding order), or None when no independent split exists.
    """
    if contains_inv(p):
        raise InversionInSpec("<query>")
    candidates: list[tuple[int, tuple, tuple, Binding]] = []
    for b in match(p, h, s, defs=defs, fuel=fuel, require_all=False):
        footprint = Heap(b.claimed)
        frame = Heap(h.edges - b.claimed)
        if footprint.vertices & frame.vertices:
            continue
        key_edges = tuple(edge_key(e) for e in footprint.sorted_edges())
        candidates.append((len(footprint), key_edges, b.env, b))
    if not candidates:
        return None
    candidates.sort(key=lambda c: (c[0], c[1], _env_key(c[2])))
    b = candidates[0][3]
    return FrameSplit(b, Heap(b.claimed), Heap(h.edges - b.claimed))


def _env_key(env: tuple) -> tuple:
    return tuple((k, value_key(v)) for k, v in env)


def _fresh_locations(h: Heap, universe) -> Iterator[Location]:
    """Locations not used by h: unused universe locations when a universe is
    declared (exhaustible), generated names otherwise."""
    used = {v.name for v in h.vertices}
    if universe is not None:
        for loc in universe.locations:
            if loc.name not in used:
                yield loc
        return
    i = 1
    while True:
        name = f"fresh{i}"
        if name not in used:
            yield Location(name)
        i += 1


def frame_apply(
    spec: Spec,
    h: Heap,
    s: StackEnv = EMPTY_STACK,
    defs: Optional[Mapping[str, PredicateDef]] = None,
    fuel: int = DEFAULT_FUEL,
    universe=None,
) -> Heap:
    """Run a contract against a call-site heap and return the heap after.

    The footprint is replaced by the post-heap; the frame is untouched.
    Symbols the precondition match did not bind, and post existentials, are
    instantiated with fresh locations outside h (allocation).  Raises
    VerificationFailure when no split exists or the post cannot combine
    independently with the frame.
    """
    if contains_partial(spec.post):
        raise VerificationFailure(f"{spec.name}: post contains an absorber; it does not denote one heap")
    split = frame_split(h, spec.pre, s, defs=defs, fuel=fuel)
    if split is None:
        return _fail(f"{spec.name}: no independent footprint for the precondition")
    env = split.binding.env_dict()
    fresh = _fresh_locations(h, universe)
    subst: dict[str, object] = {}
    for name in sorted(free_symbols(spec.post)):
        if name in env:
            val = env[name]
            subst[name] = Sym(val.name) if isinstance(val, Location) else val
        else:
            subst[name] = Sym(_next_fresh(fresh).name)
    post = subst_formula(spec.post, subst)
    post = _instantiate_existentials(post, fresh)
    result = eval_ground(post, defs=defs, fuel=fuel, universe=None)
    if result is FALSE:
        return _fail(f"{spec.name}: post evaluates to false under the binding")
    post_heap = result.to_heap()
    combined = disjoin(SignedHeap.from_heap(post_heap), SignedHeap.from_heap(split.frame))
    if combined is FALSE:
        return _fail(f"{spec.name}: post heap is not independent of the frame")
    return combined.to_heap()


def _next_fresh(gen: Iterator[Location]) -> Location:
    try:
        return next(gen)
    except StopIteration:
        raise FreshLocationExhausted("the universe has no unused location left") from None


def _instantiate_existentials(f: Formula, fresh: Iterator[Location]) -> Formula:
    """Post existentials are allocations: each binder gets one new location."""
    if isinstance(f, Exists):
        loc = _next_fresh(fresh)
        return _instantiate_existentials(subst_formula(f.body, {f.var: Sym(loc.name)}), fresh)
    if isinstance(f, Conj):
        return Conj(
            _instantiate_existentials(f.left, fresh), _instantiate_existentials(f.right, fresh)
        )
    if isinstance(f, Disj):
        return Disj(
            _instantiate_existentials(f.left, fresh), _instantiate_existentials(f.right, fresh)
        )
    return f


def _fail(cause: str) -> Heap:
    raise VerificationFailure(cause)
