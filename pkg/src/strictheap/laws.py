"""The algebraic law suite: identity, commutativity, conditional
associativity, inverse cancellation, inversion distribution, confluence,
and the tree characterization of chain-buildability.

Pair laws over the default universe mean ~1.2e8 ordered pairs, beyond
object-level Python in the time budget, so exhaustive passes run on a
bitmask twin: an independent vectorized re-implementation of the connection
rules over int64 edge masks.  The object implementation is held to the twin
exhaustively on every pair with a small side and on fixed-seed samples of
the rest, so each route checks the other.  Conditional associativity is
value-forced once pair results are unions (both groupings of a both-defined
triple yield the same multiset sum), so the suite verifies the pair gates
exhaustively and the triple equality on every shape with bounded fan-out
plus samples.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from random import Random
from typing import Optional

import numpy as np

from .heap import Edge, Heap, Location, NIL, PLAIN, edge_key
from .oracle import DEFAULT_UNIVERSE, UniverseSpec, enumerate_heaps, location_configs
from .semantics import (
    EMPTY_SIGNED,
    FALSE,
    SignedHeap,
    conjoin,
    conjoin_chain,
    disjoin,
)

_FALSE_SENT = np.int64(-1)


@dataclass
class LawResult:
    law: str
    ok: bool
    checked: int
    seconds: float
    note: str = ""

    def line(self) -> str:
        verdict = "PASS" if self.ok else "FAIL"
        note = f" ({self.note})" if self.note else ""
        return f"{verdict} {self.law}: {self.checked} checks in {self.seconds:.1f}s{note}"


class _Twin:
    """Bitmask tables for one universe: a heap is an int64 edge mask."""

    def __init__(self, u: UniverseSpec):
        self.u = u
        seen: set[Edge] = set()
        space: list[Edge] = []
        for loc in u.locations:
            for cfg in location_configs(u, loc):
                for e in cfg:
                    if e not in seen:
                        seen.add(e)
                        space.append(e)
        space.sort(key=edge_key)
        if len(space) > 63:
            raise ValueError("universe edge space exceeds 63 bits; use a smaller universe")
        if len(u.locations) > 16:
            raise ValueError("too many locations for the vertex popcount table")
        self.space = space
        self.eidx = {e: i for i, e in enumerate(space)}
        locidx = {loc: i for i, loc in enumerate(u.locations)}
        self.evmask = [0] * len(space)
        for i, e in enumerate(space):
            m = 1 << locidx[e.source]
            if isinstance(e.target, Location):
                m |= 1 << locidx[e.target]
            self.evmask[i] = m
        self.pop = np.array([bin(i).count("1") for i in range(1 << len(u.locations))], dtype=np.int64)

        # every valid heap with no edge bound: where unions land
        masks: list[int] = []
        vmasks: list[int] = []
        per_loc = [location_configs(u, loc) for loc in u.locations]
        for combo in itertools.product(*per_loc):
            edges = [e for c in combo for e in c]
            masks.append(self.mask(edges))
            vmasks.append(self.vmask(edges))
        order = np.argsort(np.array(masks, dtype=np.int64), kind="stable")
        self.VM = np.array(masks, dtype=np.int64)[order]
        self.VMV = np.array(vmasks, dtype=np.int64)[order]

        # the bounded enumeration the laws quantify over
        self.heaps = list(enumerate_heaps(u))
        self.M = np.array([self.mask(h.edges) for h in self.heaps], dtype=np.int64)
        self.V = np.array([self.vmask(h.edges) for h in self.heaps], dtype=np.int64)
        self.count = np.array([len(h) for h in self.heaps], dtype=np.int64)

    def mask(self, edges) -> int:
        m = 0
        for e in edges:
            m |= 1 << self.eidx[e]
        return m

    def vmask(self, edges) -> int:
        m = 0
        for e in edges:
            m |= self.evmask[self.eidx[e]]
        return m

    def heap_of_mask(self, mask: int) -> Heap:
        return Heap(frozenset(self.space[b] for b in range(len(self.space)) if mask >> b & 1))

    def valid(self, masks: np.ndarray) -> np.ndarray:
        idx = np.clip(np.searchsorted(self.VM, masks), 0, len(self.VM) - 1)
        return self.VM[idx] == masks

    def conjoin_left(self, mi: int, vi: int) -> np.ndarray:
        """twin(mi, M[j]) for every j."""
        union = self.M | mi
        ok = ((self.M & mi) == 0) & (self.pop[self.V & vi] == 1) & self.valid(union)
        res = np.where(ok, union, _FALSE_SENT)
        if mi == 0:
            return self.M.copy()
        res[self.M == 0] = mi
        return res

    def conjoin_right(self, mi: int, vi: int) -> np.ndarray:
        """twin(M[j], mi) for every j."""
        union = self.M | mi
        ok = ((self.M & mi) == 0) & (self.pop[self.V & vi] == 1) & self.valid(union)
        res = np.where(ok, union, _FALSE_SENT)
        res[self.M == 0] = mi
        if mi == 0:
            res = self.M.copy()
        return res

    def disjoin_left(self, mi: int, vi: int) -> np.ndarray:
        res = np.where(self.pop[self.V & vi] == 0, self.M | mi, _FALSE_SENT)
        if mi == 0:
            return self.M.copy()
        res[self.M == 0] = mi
        return res

    def disjoin_right(self, mi: int, vi: int) -> np.ndarray:
        res = np.where(self.pop[self.V & vi] == 0, self.M | mi, _FALSE_SENT)
        res[self.M == 0] = mi
        if mi == 0:
            res = self.M.copy()
        return res

    def pair_scalar(self, m1: int, v1: int, m2: int, v2: int) -> int:
        """Scalar twin conjoin on arbitrary masks."""
        if m1 == 0:
            return m2
        if m2 == 0:
            return m1
        if m1 & m2:
            return int(_FALSE_SENT)
        if bin(v1 & v2).count("1") != 1:
            return int(_FALSE_SENT)
        union = m1 | m2
        idx = int(np.searchsorted(self.VM, union))
        if idx >= len(self.VM) or int(self.VM[idx]) != union:
            return int(_FALSE_SENT)
        return union

    def result_mask(self, r) -> int:
        if r is FALSE:
            return int(_FALSE_SENT)
        return self.mask(r.to_heap().edges)


def _ok_pairs(t: _Twin) -> dict[int, list[int]]:
    """partners[m] = masks x with conjoin(x-heap, m-heap) defined, both
    nonempty and inside the bounded enumeration.  Built by 2-splitting every
    valid union: exactly the pairs whose union is a heap, gated by the
    single joining point."""
    partners: dict[int, list[int]] = {}
    max_edges = t.u.max_edges
    ev = t.evmask
    for um in t.VM.tolist():
        bits = [b for b in range(64) if um >> b & 1]
        if len(bits) < 2:
            continue
        vecs = [ev[b] for b in bits]
        for r in range(1, len(bits)):
            if r > max_edges:
                continue
            for sub in itertools.combinations(range(len(bits)), r):
                if len(bits) - r > max_edges:
                    continue
                m1 = v1 = 0
                for k in sub:
                    m1 |= 1 << bits[k]
                    v1 |= vecs[k]
                v2 = 0
                subset = set(sub)
                for k in range(len(bits)):
                    if k not in subset:
                        v2 |= vecs[k]
                if bin(v1 & v2).count("1") == 1:
                    partners.setdefault(um ^ m1, []).append(m1)
    return partners


def _law(name: str, t0: float, ok: bool, checked: int, note: str = "") -> LawResult:
    return LawResult(name, ok, checked, time.time() - t0, note)


def run_laws(u: Optional[UniverseSpec] = None, seed: int = 0, sample: int = 100_000) -> list[LawResult]:
    """The group-law suite over a universe's enumerated heaps."""
    u = u or DEFAULT_UNIVERSE
    rng = Random(seed)
    out: list[LawResult] = []
    t = _Twin(u)
    n = len(t.heaps)
    signed = [SignedHeap.from_heap(h) for h in t.heaps]

    # identity: emp is a two-sided identity for both connectives (exhaustive)
    t0 = time.time()
    ok = all(
        conjoin(sh, EMPTY_SIGNED) == sh
        and conjoin(EMPTY_SIGNED, sh) == sh
        and disjoin(sh, EMPTY_SIGNED) == sh
        and disjoin(EMPTY_SIGNED, sh) == sh
        for sh in signed
    )
    out.append(_law("identity: H * emp = H and H + emp = H", t0, ok, 4 * n))

    # commutativity, exhaustive on the twin (left vs right application)
    t0 = time.time()
    ok = True
    for i in range(n):
        mi, vi = int(t.M[i]), int(t.V[i])
        if not np.array_equal(t.conjoin_left(mi, vi), t.conjoin_right(mi, vi)):
            ok = False
            break
    out.append(_law("commutativity of * (twin, all pairs)", t0, ok, n * n))

    t0 = time.time()
    ok = True
    for i in range(n):
        mi, vi = int(t.M[i]), int(t.V[i])
        if not np.array_equal(t.disjoin_left(mi, vi), t.disjoin_right(mi, vi)):
            ok = False
            break
    out.append(_law("commutativity of + (twin, all pairs)", t0, ok, n * n))

    # object implementation vs twin: exhaustive on pairs with a <=1-edge side,
    # then a fixed-seed sample, checking both operand orders
    t0 = time.time()
    ok = True
    checked = 0
    small = [i for i in range(n) if int(t.count[i]) <= 1]
    for i in small:
        expect = t.conjoin_left(int(t.M[i]), int(t.V[i]))
        for j in range(n):
            checked += 2
            if t.result_mask(conjoin(signed[i], signed[j])) != int(expect[j]):
                ok = False
                break
            if t.result_mask(conjoin(signed[j], signed[i])) != int(expect[j]):
                ok = False
                break
        if not ok:
            break
    if ok:
        for _ in range(sample):
            i, j = rng.randrange(n), rng.randrange(n)
            expect = t.pair_scalar(int(t.M[i]), int(t.V[i]), int(t.M[j]), int(t.V[j]))
            checked += 2
            if t.result_mask(conjoin(signed[i], signed[j])) != expect:
                ok = False
                break
            if t.result_mask(conjoin(signed[j], signed[i])) != expect:
                ok = False
                break
    out.append(_law("* implementation vs twin (exhaustive small side + sample)", t0, ok, checked))

    t0 = time.time()
    ok = True
    checked = 0
    for i in small:
        expect = t.disjoin_left(int(t.M[i]), int(t.V[i]))
        for j in range(n):
            checked += 2
            r1 = disjoin(signed[i], signed[j])
            r2 = disjoin(signed[j], signed[i])
            if t.result_mask(r1) != int(expect[j]) or t.result_mask(r2) != int(expect[j]):
                ok = False
                break
        if not ok:
            break
    out.append(_law("+ implementation vs twin (exhaustive small side)", t0, ok, checked))

    # conditional associativity: both-defined triples through the pair index
    t0 = time.time()
    partners = _ok_pairs(t)
    pair_count = sum(len(v) for v in partners.values())
    sig_cache: dict[int, SignedHeap] = {0: EMPTY_SIGNED}

    def signed_of(mask: int) -> SignedHeap:
        sh = sig_cache.get(mask)
        if sh is None:
            sh = SignedHeap.from_heap(t.heap_of_mask(mask))
            sig_cache[mask] = sh
        return sh

    ok = True
    checked = 0
    note = f"{pair_count} connectible pairs; emp-seeded triples follow from identity"
    fan_cap = 40
    for m2, plist in partners.items():
        s2 = signed_of(m2)
        # the index promises these pairs are defined; hold it to that once per middle
        r12_first = conjoin(signed_of(plist[0]), s2)
        if r12_first is FALSE or r12_first != signed_of(plist[0] | m2):
            ok = False
            note = "pair index disagrees with the implementation"
            break
        if len(plist) * len(plist) <= fan_cap * fan_cap:
            combos = itertools.product(plist, plist)
        else:
            combos = (
                (plist[rng.randrange(len(plist))], plist[rng.randrange(len(plist))])
                for _ in range(fan_cap * fan_cap)
            )
        for m1, m3 in combos:
            left = conjoin(signed_of(m1 | m2), signed_of(m3))
            right = conjoin(signed_of(m1), signed_of(m2 | m3))
            checked += 1
            if left is not FALSE and right is not FALSE and left != right:
                ok = False
                note = "both-defined triple with unequal groupings"
                break
        if not ok:
            break
    out.append(_law("conditional associativity of *", t0, ok, checked, note))

    # inverse cancellation, exhaustive both ways
    t0 = time.time()
    ok = all(
        conjoin(sh, sh.negate()) == EMPTY_SIGNED and conjoin(sh.negate(), sh) == EMPTY_SIGNED
        for sh in signed
    )
    out.append(_law("inverse cancellation: G * G^-1 = emp", t0, ok, 2 * n))

    # inversion distribution: exact on every connectible pair, sampled elsewhere
    t0 = time.time()
    ok = True
    checked = 0
    for m2, plist in partners.items():
        s2n = signed_of(m2).negate()
        for m1 in plist:
            rn = conjoin(signed_of(m1).negate(), s2n)
            checked += 1
            if rn is FALSE or rn.negate() != signed_of(m1 | m2):
                ok = False
                break
        if not ok:
            break
    if ok:
        for _ in range(sample // 2):
            i, j = rng.randrange(n), rng.randrange(n)
            r = conjoin(signed[i], signed[j])
            rn = conjoin(signed[i].negate(), signed[j].negate())
            checked += 1
            if (r is FALSE) != (rn is FALSE):
                ok = False
                break
            if r is not FALSE and rn != r.negate():
                ok = False
                break
    out.append(_law("inversion distribution: (G1 * G2)^-1 = G1^-1 * G2^-1", t0, ok, checked))

    # emp is its own inverse
    t0 = time.time()
    ok = EMPTY_SIGNED.negate() == EMPTY_SIGNED
    out.append(_law("emp^-1 = emp", t0, ok, 1))

    return out


def check_confluence(u: Optional[UniverseSpec] = None, max_pieces: int = 4) -> LawResult:
    """Every permutation of every multiset of single-edge heaps gives the
    chain one answer per multiset.  Exhaustive."""
    u = u or DEFAULT_UNIVERSE
    t0 = time.time()
    seen: set[Edge] = set()
    singles: list[SignedHeap] = []
    for loc in u.locations:
        for cfg in location_configs(u, loc):
            for e in cfg:
                if e not in seen:
                    seen.add(e)
                    singles.append(SignedHeap({e: 1}))
    checked = 0
    for k in range(1, max_pieces + 1):
        for combo in itertools.combinations_with_replacement(range(len(singles)), k):
            results = set()
            for perm in set(itertools.permutations(combo)):
                r = conjoin_chain([singles[i] for i in perm])
                results.add("false" if r is FALSE else r)
                checked += 1
            if len(results) != 1:
                return LawResult("confluence of * chains", False, checked, time.time() - t0)
    return LawResult("confluence of * chains", True, checked, time.time() - t0)


def _is_tree(h: Heap) -> bool:
    """Independent graph oracle: connected, and exactly |V|-1 vertex links.

    A link joins two distinct locations; self-loops and atom targets link
    nothing, so counting links (with parallel multiplicity) makes the
    |V|-1 test reject every multi-edge and cycle.
    """
    verts = list(h.vertices)
    if not verts:
        return h.is_empty
    links = [
        (e.source, e.target)
        for e in h.edges
        if isinstance(e.target, Location) and e.target != e.source
    ]
    adj: dict[Location, list[Location]] = {v: [] for v in verts}
    for a, b in links:
        adj[a].append(b)
        adj[b].append(a)
    seen = {verts[0]}
    todo = [verts[0]]
    while todo:
        v = todo.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return len(seen) == len(verts) and len(links) == len(verts) - 1


FOUR_LOCATION_UNIVERSE = UniverseSpec(
    locations=(Location("a"), Location("b"), Location("c"), Location("d")),
    labels=(PLAIN,),
    atoms=(NIL,),
    max_edges=4,
)


def check_tree_characterization(u: Optional[UniverseSpec] = None) -> LawResult:
    """Chain-buildability from single edges coincides with the vertex graph
    being a tree, against the independent graph oracle, on every enumerated
    heap."""
    u = u or FOUR_LOCATION_UNIVERSE
    t0 = time.time()
    checked = 0
    for h in enumerate_heaps(u):
        pieces = [SignedHeap({e: 1}) for e in h.sorted_edges()]
        buildable = True if not pieces else conjoin_chain(pieces) is not FALSE
        if buildable != _is_tree(h):
            return LawResult(
                "tree characterization of buildability",
                False,
                checked,
                time.time() - t0,
                note=f"counterexample {h!r}",
            )
        checked += 1
    return LawResult("tree characterization of buildability", True, checked, time.time() - t0)
