"""Ground semantics: signed-heap connection algebra, evaluation, matching.

Three layers live here.  The algebra (`conjoin`, `disjoin`, `conjoin_chain`)
works on signed heaps, edge multisets with integer multiplicities, so that
inverses cancel: G has the formal inverse G with every multiplicity negated,
and conjoining the two gives the empty heap.  `eval_ground` evaluates a
formula to one signed heap (or the false value), reading symbols as literal
location names.  `match` is the satisfaction direction: symbols are
variables, and it returns every binding under which the formula denotes
exactly the given concrete heap.

The strict conjunction connects two heaps only when they share exactly one
vertex and their union is still a simple, well-formed heap; everything else
is the false value, never an error, so the operation is total.  Chains of
conjunctions connect in whatever order succeeds: the result does not depend
on operand order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Union

from .heap import (
    Atom,
    Edge,
    EMPTY_STACK,
    FieldLabel,
    Heap,
    Location,
    StackEnv,
    Value,
    edge_key,
    format_edge,
    format_value,
)
from .formula import (
    Call,
    Conj,
    Disj,
    Emp,
    Exists,
    FalseHeap,
    Formula,
    Inv,
    Path,
    PointsTo,
    PredicateDef,
    Sym,
    Term,
    TrueAny,
    TrueOf,
    all_symbols,
    conj_operands,
    disj_operands,
    subst_formula,
)

# --- errors ------------------------------------------------------------------


class EvalError(Exception):
    """A formula reached evaluation in a shape evaluation does not cover."""


class UndefinedPredicate(EvalError):
    def __init__(self, name: str):
        super().__init__(f"undefined predicate {name!r}")
        self.name = name


class FuelExhausted(EvalError):
    def __init__(self, pred: str):
        super().__init__(f"unfolding {pred!r} exceeded the fuel bound")
        self.pred = pred


class InversionNotMatchable(Exception):
    """Inversion is calculation-only; satisfaction of inverted terms is undefined."""


DEFAULT_FUEL = 8


# --- signed heaps -------------------------------------------------------------


class SignedHeap:
    """An edge multiset with non-zero integer multiplicities.

    Plain heaps embed with every multiplicity +1; negating all multiplicities
    gives the formal inverse.  Zero entries are never stored.
    """

    __slots__ = ("_mult", "_verts")

    def __init__(self, mult: Union[Mapping[Edge, int], Iterable[tuple[Edge, int]]] = ()):
        items = mult.items() if isinstance(mult, Mapping) else mult
        d: dict[Edge, int] = {}
        for e, m in items:
            m = d.get(e, 0) + m
            if m:
                d[e] = m
            elif e in d:
                del d[e]
        self._mult = d
        self._verts: Optional[frozenset[Location]] = None

    @classmethod
    def from_heap(cls, h: Heap) -> "SignedHeap":
        return cls((e, 1) for e in h.edges)

    def to_heap(self) -> Heap:
        if not self.all_positive or any(m != 1 for m in self._mult.values()):
            raise ValueError("only an all-(+1) signed heap embeds a heap")
        return Heap(frozenset(self._mult))

    @property
    def edges(self) -> frozenset[Edge]:
        return frozenset(self._mult)

    def mult(self, e: Edge) -> int:
        return self._mult.get(e, 0)

    @property
    def is_emp(self) -> bool:
        return not self._mult

    @property
    def all_positive(self) -> bool:
        return all(m > 0 for m in self._mult.values())

    @property
    def all_negative(self) -> bool:
        return all(m < 0 for m in self._mult.values())

    @property
    def vertices(self) -> frozenset[Location]:
        if self._verts is None:
            verts = set()
            for e in self._mult:
                verts.add(e.source)
                if isinstance(e.target, Location):
                    verts.add(e.target)
            self._verts = frozenset(verts)
        return self._verts

    def negate(self) -> "SignedHeap":
        return SignedHeap((e, -m) for e, m in self._mult.items())

    def add(self, other: "SignedHeap") -> "SignedHeap":
        out = dict(self._mult)
        for e, m in other._mult.items():
            n = out.get(e, 0) + m
            if n:
                out[e] = n
            elif e in out:
                del out[e]
        return SignedHeap(out)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SignedHeap) and self._mult == other._mult

    def __hash__(self) -> int:
        return hash(frozenset(self._mult.items()))

    def __len__(self) -> int:
        return len(self._mult)

    def __repr__(self) -> str:
        return f"SignedHeap({format_signed(self)})"


EMPTY_SIGNED = SignedHeap()


class FalseResult:
    """The false value: the total answer for unconnectible combinations."""

    _instance: Optional["FalseResult"] = None

    def __new__(cls) -> "FalseResult":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "false"


FALSE = FalseResult()

EvalResult = Union[SignedHeap, FalseResult]


def is_false(r: EvalResult) -> bool:
    return r is FALSE


def format_signed(sh: SignedHeap) -> str:
    if sh.is_emp:
        return "emp"
    if sh.all_positive and all(sh.mult(e) == 1 for e in sh.edges):
        return "{" + ", ".join(format_edge(e) for e in sorted(sh.edges, key=edge_key)) + "}"
    parts = [f"{format_edge(e)} [{sh.mult(e):+d}]" for e in sorted(sh.edges, key=edge_key)]
    return "{" + ", ".join(parts) + "}"


def format_result(r: EvalResult) -> str:
    return "false" if r is FALSE else format_signed(r)


# --- strict connection --------------------------------------------------------


def _is_simple_heap(sh: SignedHeap) -> bool:
    """All multiplicities +1 and the edge set is source-unique, label-clean."""
    cells: set[tuple[Location, FieldLabel]] = set()
    plain: set[Location] = set()
    named: set[Location] = set()
    for e, m in sh._mult.items():
        if m != 1:
            return False
        cell = (e.source, e.label)
        if cell in cells:
            return False
        cells.add(cell)
        (plain if e.label.is_plain else named).add(e.source)
    return not (plain & named)


def _conjoin_positive(h1: SignedHeap, h2: SignedHeap) -> EvalResult:
    if h1._mult.keys() & h2._mult.keys():
        return FALSE  # a shared edge would get multiplicity 2
    if len(h1.vertices & h2.vertices) != 1:
        return FALSE
    union = h1.add(h2)
    return union if _is_simple_heap(union) else FALSE


def conjoin(h1: SignedHeap, h2: SignedHeap) -> EvalResult:
    """Strictly connect two signed heaps; emp is the two-sided identity.

    Uniform-sign operands connect when they share exactly one vertex and the
    union stays a simple well-formed heap (negative pairs mirror positive
    pairs through negation, which is what makes inversion distribute over
    the conjunction).  Mixed signs cancel by multiset addition: the result
    must be emp, or a uniform-sign simple heap sharing exactly one vertex
    with what was cancelled away.
    """
    if h1.is_emp:
        return h2
    if h2.is_emp:
        return h1
    if h1.all_positive and h2.all_positive:
        return _conjoin_positive(h1, h2)
    if h1.all_negative and h2.all_negative:
        r = _conjoin_positive(h1.negate(), h2.negate())
        return FALSE if r is FALSE else r.negate()

    total = h1.add(h2)
    if total.is_emp:
        return EMPTY_SIGNED
    cancelled = (h1.edges | h2.edges) - total.edges
    cancelled_verts: set[Location] = set()
    for e in cancelled:
        cancelled_verts.add(e.source)
        if isinstance(e.target, Location):
            cancelled_verts.add(e.target)
    if total.all_positive and _is_simple_heap(total):
        pass
    elif total.all_negative and _is_simple_heap(total.negate()):
        pass
    else:
        return FALSE
    return total if len(total.vertices & cancelled_verts) == 1 else FALSE


def disjoin(h1: SignedHeap, h2: SignedHeap) -> EvalResult:
    """Combine two independent heaps; emp is the identity.

    Independence means no shared vertex at all; mixed multiplicity signs
    across the two operands never combine.
    """
    if h1.is_emp:
        return h2
    if h2.is_emp:
        return h1
    uniform = (h1.all_positive and h2.all_positive) or (h1.all_negative and h2.all_negative)
    if not uniform:
        return FALSE
    if h1.vertices & h2.vertices:
        return FALSE
    return h1.add(h2)


def conjoin_chain(heaps: Sequence[SignedHeap]) -> EvalResult:
    """Connect a whole chain, consuming operands in whatever order works.

    False exactly when no consumption order completes.  Because the value of
    a completed chain is the plain multiset sum, any two completing orders
    agree, so the result is independent of the input order.
    """
    hs = list(heaps)
    if not hs:
        raise ValueError("conjoin_chain needs at least one operand")
    dead: set[frozenset[int]] = set()

    def search(acc: SignedHeap, remaining: frozenset[int]) -> EvalResult:
        if not remaining:
            return acc
        if remaining in dead:
            return FALSE
        for i in sorted(remaining):
            r = conjoin(acc, hs[i])
            if r is not FALSE:
                out = search(r, remaining - {i})
                if out is not FALSE:
                    return out
        dead.add(remaining)
        return FALSE

    return search(hs[0], frozenset(range(1, len(hs))))


# --- path desugaring ----------------------------------------------------------


def _fresh(base: str, used: set[str]) -> str:
    i = 1
    while f"{base}{i}" in used:
        i += 1
    name = f"{base}{i}"
    used.add(name)
    return name


def desugar_points_to(pt: PointsTo, used: Iterable[str] = ()) -> Formula:
    """Rewrite a field-path points-to into single hops under fresh binders.

    ``a.f1.f2 |-> x`` becomes ``ex t . (a.f1 |-> t) * (t.f2 |-> x)``; longer
    paths nest on the left.  Fresh names never capture symbols from `used`.
    """
    used_set = set(used) | set(all_symbols(pt))

    def build(lhs: Term, label: FieldLabel, rhs: Term) -> Formula:
        if isinstance(lhs, Path):
            t = _fresh("t", used_set)
            prefix = build(lhs.base, FieldLabel(lhs.field), Sym(t))
            return Exists(t, Conj(prefix, PointsTo(Sym(t), label, rhs)))
        return PointsTo(lhs, label, rhs)

    return build(pt.lhs, pt.label, pt.rhs)


def _desugar_node(f: Formula, used: Iterable[str]) -> Formula:
    """Expand field paths appearing at one node (points-to, call, true(a))."""
    if isinstance(f, PointsTo) and isinstance(f.lhs, Path):
        return desugar_points_to(f, used)
    if isinstance(f, Call) and any(isinstance(a, Path) for a in f.args):
        used_set = set(used) | set(all_symbols(f))
        binders: list[tuple[str, Path]] = []
        args: list[Term] = []
        for a in f.args:
            if isinstance(a, Path):
                t = _fresh("t", used_set)
                binders.append((t, a))
                args.append(Sym(t))
            else:
                args.append(a)
        out: Formula = Call(f.pred, tuple(args))
        for t, p in reversed(binders):
            hop = PointsTo(p.base, FieldLabel(p.field), Sym(t))
            if isinstance(p.base, Path):
                hop = desugar_points_to(hop, used_set)
            out = Exists(t, Conj(hop, out))
        return out
    if isinstance(f, TrueOf) and isinstance(f.obj, Path):
        used_set = set(used) | set(all_symbols(f))
        t = _fresh("t", used_set)
        hop = PointsTo(f.obj.base, FieldLabel(f.obj.field), Sym(t))
        if isinstance(f.obj.base, Path):
            hop = desugar_points_to(hop, used_set)
        return Exists(t, Conj(hop, TrueOf(Sym(t))))
    return f


# --- ground evaluation --------------------------------------------------------


def _literal_value(t: Term) -> Value:
    if isinstance(t, Sym):
        return Location(t.name)
    if isinstance(t, Atom):
        return t
    raise EvalError("field path escaped desugaring")


def eval_ground(
    f: Formula,
    defs: Optional[Mapping[str, PredicateDef]] = None,
    fuel: int = DEFAULT_FUEL,
    universe: Optional[Sequence[Location]] = None,
) -> EvalResult:
    """Evaluate a heap term to a signed heap or the false value.

    Symbols are read as literal location names.  `*` chains connect in any
    completing order; `+` requires independence; inversion negates
    multiplicities.  Existentials range over `universe` in declared order and
    take the first non-false instantiation.  The match-only constants true
    and true(a) are rejected.
    """
    return _eval(f, dict(defs or {}), fuel, universe)


def _eval(
    f: Formula,
    defs: dict[str, PredicateDef],
    fuel: int,
    universe: Optional[Sequence[Location]],
) -> EvalResult:
    if isinstance(f, Emp):
        return EMPTY_SIGNED
    if isinstance(f, FalseHeap):
        return FALSE
    if isinstance(f, (TrueAny, TrueOf)):
        raise EvalError("true/true(a) are match-only constants")
    if isinstance(f, PointsTo):
        if isinstance(f.lhs, Path):
            return _eval(desugar_points_to(f), defs, fuel, universe)
        src = _literal_value(f.lhs)
        if isinstance(src, Atom):
            return FALSE  # an atom has no cell to assign
        return SignedHeap({Edge(src, f.label, _literal_value(f.rhs)): 1})
    if isinstance(f, Inv):
        r = _eval(f.body, defs, fuel, universe)
        return FALSE if r is FALSE else r.negate()
    if isinstance(f, Conj):
        parts = []
        for op in conj_operands(f):
            r = _eval(op, defs, fuel, universe)
            if r is FALSE:
                return FALSE
            parts.append(r)
        return conjoin_chain(parts)
    if isinstance(f, Disj):
        acc: Optional[SignedHeap] = None
        for op in disj_operands(f):
            r = _eval(op, defs, fuel, universe)
            if r is FALSE:
                return FALSE
            acc = r if acc is None else disjoin(acc, r)
            if acc is FALSE:
                return FALSE
        assert acc is not None
        return acc
    if isinstance(f, Exists):
        if universe is None:
            raise EvalError("existential evaluation needs a declared location universe")
        for loc in universe:
            r = _eval(subst_formula(f.body, {f.var: Sym(loc.name)}), defs, fuel, universe)
            if r is not FALSE:
                return r
        return FALSE
    if isinstance(f, Call):
        d = defs.get(f.pred)
        if d is None:
            raise UndefinedPredicate(f.pred)
        if len(f.args) != len(d.params):
            raise EvalError(f"{f.pred} expects {len(d.params)} arguments, got {len(f.args)}")
        if fuel <= 0:
            raise FuelExhausted(f.pred)
        body = subst_formula(d.body, dict(zip(d.params, f.args)))
        return _eval(body, defs, fuel - 1, universe)
    raise TypeError(f"not a formula: {f!r}")


# --- matching -----------------------------------------------------------------


@dataclass(frozen=True)
class Binding:
    """One way a formula denotes a heap: bound symbols plus claimed edges."""

    env: tuple[tuple[str, Value], ...]
    claimed: frozenset[Edge]

    def env_dict(self) -> dict[str, Value]:
        return dict(self.env)

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={format_value(v)}" for k, v in self.env)
        return "{" + inner + "}"


_Env = tuple[tuple[str, Value], ...]


def _env_set(env: _Env, name: str, val: Value) -> _Env:
    return tuple(sorted(env + ((name, val),)))


def _env_get(env: _Env, name: str) -> Optional[Value]:
    for k, v in env:
        if k == name:
            return v
    return None


def _env_drop(env: _Env, name: str) -> _Env:
    return tuple((k, v) for k, v in env if k != name)


class _Matcher:
    def __init__(self, h: Heap, defs: Mapping[str, PredicateDef], fuel: int):
        self.h = h
        self.defs = defs
        self.fuel0 = fuel
        self.edges = h.sorted_edges()
        self.everts: dict[Edge, frozenset[Location]] = {}
        for e in self.edges:
            vs = {e.source}
            if isinstance(e.target, Location):
                vs.add(e.target)
            self.everts[e] = frozenset(vs)
        self.fuel_hit: Optional[str] = None
        self.unfold_stack: set[tuple] = set()

    def verts(self, edges: Iterable[Edge]) -> frozenset[Location]:
        out: set[Location] = set()
        for e in edges:
            out |= self.everts[e]
        return frozenset(out)

    def _canon_args(self, args: tuple[Term, ...], env: _Env) -> tuple:
        """Arguments resolved under the environment, with unbound symbols
        numbered by first occurrence, so alpha-variant calls collide."""
        canon: list[tuple] = []
        unbound: dict[str, int] = {}
        for a in args:
            if isinstance(a, Sym):
                v = _env_get(env, a.name)
                if v is not None:
                    canon.append(("v", v))
                else:
                    canon.append(("u", unbound.setdefault(a.name, len(unbound))))
            else:
                canon.append(("a", a))
        return tuple(canon)

    # unification ------------------------------------------------------------

    def _unify(self, t: Term, v: Value, env: _Env) -> Optional[_Env]:
        if isinstance(t, Sym):
            bound = _env_get(env, t.name)
            if bound is None:
                return _env_set(env, t.name, v)
            return env if bound == v else None
        if isinstance(t, Atom):
            return env if t == v else None
        return None  # paths are desugared before unification

    # node dispatch ------------------------------------------------------------

    def match(self, f: Formula, env: _Env, claimed: frozenset[Edge], fuel: int) -> Iterator[tuple[_Env, frozenset[Edge]]]:
        f = _desugar_node(f, [k for k, _ in env])
        if isinstance(f, Emp):
            yield env, claimed
        elif isinstance(f, TrueAny):
            yield env, claimed | (self.h.edges - claimed)
        elif isinstance(f, FalseHeap):
            return
        elif isinstance(f, TrueOf):
            yield from self._match_trueof(f, env, claimed)
        elif isinstance(f, PointsTo):
            yield from self._match_pointsto(f, env, claimed)
        elif isinstance(f, Conj):
            seen: set[tuple[_Env, frozenset[Edge]]] = set()
            for env1, claimed1, _acc in self._match_chain(conj_operands(f), env, claimed, frozenset(), fuel):
                key = (env1, claimed1)
                if key not in seen:
                    seen.add(key)
                    yield key
        elif isinstance(f, Disj):
            yield from self._match_disj(disj_operands(f), env, claimed, fuel)
        elif isinstance(f, Exists):
            used = set(all_symbols(f.body)) | {k for k, _ in env} | {f.var}
            t = _fresh(f.var, used)
            body = subst_formula(f.body, {f.var: Sym(t)})
            for env1, claimed1 in self.match(body, env, claimed, fuel):
                yield _env_drop(env1, t), claimed1
        elif isinstance(f, Call):
            d = self.defs.get(f.pred)
            if d is None:
                raise UndefinedPredicate(f.pred)
            if len(f.args) != len(d.params):
                raise EvalError(f"{f.pred} expects {len(d.params)} arguments, got {len(f.args)}")
            # a repeated unfolding state on one search path makes no progress
            # (same resolved arguments, same claims): cut the loop
            state = (f.pred, self._canon_args(f.args, env), claimed)
            if state in self.unfold_stack:
                return
            if fuel <= 0:
                if self.fuel_hit is None:
                    self.fuel_hit = f.pred
                return
            body = subst_formula(d.body, dict(zip(d.params, f.args)))
            if any(isinstance(g, Inv) for g in _formula_nodes(body)):
                raise InversionNotMatchable(f"{f.pred} unfolds to an inverted term")
            self.unfold_stack.add(state)
            try:
                yield from self.match(body, env, claimed, fuel - 1)
            finally:
                self.unfold_stack.discard(state)
        elif isinstance(f, Inv):
            raise InversionNotMatchable("inverted terms have no satisfaction reading")
        else:
            raise TypeError(f"not a formula: {f!r}")

    def _match_pointsto(self, f: PointsTo, env: _Env, claimed: frozenset[Edge]) -> Iterator[tuple[_Env, frozenset[Edge]]]:
        for e in self.edges:
            if e in claimed or e.label != f.label:
                continue
            env1 = self._unify(f.lhs, e.source, env)
            if env1 is None:
                continue
            env2 = self._unify(f.rhs, e.target, env1)
            if env2 is None:
                continue
            yield env2, claimed | {e}

    def _match_trueof(self, f: TrueOf, env: _Env, claimed: frozenset[Edge]) -> Iterator[tuple[_Env, frozenset[Edge]]]:
        obj = f.obj
        if isinstance(obj, Sym):
            bound = _env_get(env, obj.name)
            if bound is None:
                # an unconstrained object symbol ranges over the heap's vertices
                for loc in sorted(self.h.vertices, key=lambda l: l.name):
                    env1 = _env_set(env, obj.name, loc)
                    yield env1, claimed | self._fields_of(loc, claimed)
                return
            obj_val = bound
        else:
            obj_val = obj  # an atom: no fields, absorbs nothing
        if isinstance(obj_val, Location):
            yield env, claimed | self._fields_of(obj_val, claimed)
        else:
            yield env, claimed

    def _fields_of(self, loc: Location, claimed: frozenset[Edge]) -> frozenset[Edge]:
        return frozenset(e for e in self.edges if e.source == loc and e not in claimed)

    def _match_chain(
        self,
        ops: list[Formula],
        env: _Env,
        claimed: frozenset[Edge],
        acc: frozenset[Edge],
        fuel: int,
    ) -> Iterator[tuple[_Env, frozenset[Edge], frozenset[Edge]]]:
        """Connect `*` operands: absorbers stay in place, the rest connect in
        any order that keeps exactly one joining point with what is already
        accumulated (empty claims are the identity and always pass)."""
        if not ops:
            yield env, claimed, acc
            return
        first_barrier = next(
            (i for i, op in enumerate(ops) if isinstance(op, (TrueAny, TrueOf))),
            len(ops),
        )
        if first_barrier == 0:
            # absorbers take all leftovers at their own position, exempt from
            # the joining condition: they are remainders, not heap terms
            for env1, claimed1 in self.match(ops[0], env, claimed, fuel):
                new = claimed1 - claimed
                yield from self._match_chain(ops[1:], env1, claimed1, acc | new, fuel)
            return
        segment = ops[:first_barrier]
        rest = ops[first_barrier:]
        seen: set[tuple[frozenset[int], _Env, frozenset[Edge]]] = set()

        def consume(remaining: frozenset[int], env_c: _Env, claimed_c: frozenset[Edge], acc_c: frozenset[Edge]):
            if not remaining:
                yield from self._match_chain(rest, env_c, claimed_c, acc_c, fuel)
                return
            key = (remaining, env_c, claimed_c)
            if key in seen:
                return
            seen.add(key)
            for i in sorted(remaining):
                for env1, claimed1 in self.match(segment[i], env_c, claimed_c, fuel):
                    new = claimed1 - claimed_c
                    if new and acc_c:
                        if len(self.verts(acc_c) & self.verts(new)) != 1:
                            continue
                    yield from consume(remaining - {i}, env1, claimed1, acc_c | new)

        yield from consume(frozenset(range(len(segment))), env, claimed, acc)

    def _match_disj(
        self, ops: list[Formula], env: _Env, claimed: frozenset[Edge], fuel: int
    ) -> Iterator[tuple[_Env, frozenset[Edge]]]:
        """`+` matches through any nonempty subset of its operands, with the
        taken branches claiming pairwise vertex-disjoint regions.  Taking a
        single branch is the disjunction reading; taking several is the
        independent composition."""
        seen: set[tuple[_Env, frozenset[Edge]]] = set()
        n = len(ops)
        for r in range(1, n + 1):
            for subset in itertools.combinations(range(n), r):

                def walk(pos: int, env_c: _Env, claimed_c: frozenset[Edge], used_verts: frozenset[Location]):
                    if pos == len(subset):
                        key = (env_c, claimed_c)
                        if key not in seen:
                            seen.add(key)
                            yield key
                        return
                    for env1, claimed1 in self.match(ops[subset[pos]], env_c, claimed_c, fuel):
                        new = claimed1 - claimed_c
                        nv = self.verts(new)
                        if nv & used_verts:
                            continue
                        yield from walk(pos + 1, env1, claimed1, used_verts | nv)

                yield from walk(0, env, claimed, frozenset())


def _formula_nodes(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, (Conj, Disj)):
        yield from _formula_nodes(f.left)
        yield from _formula_nodes(f.right)
    elif isinstance(f, (Inv, Exists)):
        yield from _formula_nodes(f.body)


def match(
    f: Formula,
    h: Heap,
    s: StackEnv = EMPTY_STACK,
    defs: Optional[Mapping[str, PredicateDef]] = None,
    fuel: int = DEFAULT_FUEL,
    require_all: bool = True,
) -> frozenset[Binding]:
    """All bindings under which f denotes exactly h (or a sub-heap of h when
    ``require_all`` is off, which is what footprint search needs).

    Stack variables come pre-bound to their root locations; other symbols
    bind by unification.  Fuel bounds predicate unfolding depth: branches cut
    off by fuel are dropped, and only if nothing matched at all does the cut
    surface as FuelExhausted, so an empty answer is never silently wrong.
    """
    if any(isinstance(g, Inv) for g in _formula_nodes(f)):
        raise InversionNotMatchable("inverted terms have no satisfaction reading")
    m = _Matcher(h, dict(defs or {}), fuel)
    env0: _Env = tuple(sorted((var, loc) for var, loc in s.roots))
    out: set[Binding] = set()
    for env, claimed in m.match(f, env0, frozenset(), fuel):
        if require_all and claimed != h.edges:
            continue
        out.add(Binding(env, claimed))
    if not out and m.fuel_hit is not None:
        raise FuelExhausted(m.fuel_hit)
    return frozenset(out)
