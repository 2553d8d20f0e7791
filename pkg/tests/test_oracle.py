"""Enumeration, sampling, and definitional equivalence."""

import itertools
import random

import pytest

from strictheap.heap import Atom, FieldLabel, Location, NIL, PLAIN
from strictheap.oracle import (
    DEFAULT_UNIVERSE,
    UniverseSpec,
    UniverseTooLarge,
    enumerate_heaps,
    location_configs,
    model_heaps,
    oracle_equiv,
    parse_universe,
    random_formula,
    random_heap,
)
from strictheap.parser import parse_defs, parse_formula as P


def closed_form_count(u):
    """Independent count: convolve per-location edge-count polynomials."""
    poly = [1]
    for loc in u.locations:
        counts = {}
        for cfg in location_configs(u, loc):
            counts[len(cfg)] = counts.get(len(cfg), 0) + 1
        nxt = [0] * (len(poly) + max(counts))
        for i, c in enumerate(poly):
            for k, n in counts.items():
                nxt[i + k] += c * n
        poly = nxt
    return sum(poly[: u.max_edges + 1])


def test_single_location_count():
    u = UniverseSpec((Location("a"),), (PLAIN,), (NIL,), 1)
    hs = list(enumerate_heaps(u))
    assert len(hs) == 3  # {}, a->nil, a->a


def test_two_location_count():
    u = UniverseSpec((Location("a"), Location("b")), (PLAIN,), (), 4)
    assert len(list(enumerate_heaps(u))) == 9


def test_zero_edge_bound():
    u = UniverseSpec((Location("a"),), (PLAIN,), (NIL,), 0)
    assert [h.edges for h in enumerate_heaps(u)] == [frozenset()]


@pytest.mark.parametrize(
    "u",
    [
        DEFAULT_UNIVERSE,
        UniverseSpec((Location("a"), Location("b")), (PLAIN, FieldLabel("f")), (NIL,), 3),
        UniverseSpec((Location("p"),), (FieldLabel("f"), FieldLabel("g")), (Atom(1),), 2),
    ],
)
def test_enumeration_matches_closed_form(u):
    hs = list(enumerate_heaps(u))
    assert len(hs) == closed_form_count(u)
    assert len(set(hs)) == len(hs)  # no duplicates


def test_enumeration_is_wellformed_and_bounded():
    for h in enumerate_heaps(DEFAULT_UNIVERSE):
        assert h.is_wellformed()
        assert len(h) <= DEFAULT_UNIVERSE.max_edges


def test_enumeration_deterministic_order():
    a = list(itertools.islice(enumerate_heaps(DEFAULT_UNIVERSE), 200))
    b = list(itertools.islice(enumerate_heaps(DEFAULT_UNIVERSE), 200))
    assert a == b


def test_model_budget_guard():
    with pytest.raises(UniverseTooLarge):
        model_heaps(DEFAULT_UNIVERSE, budget=100)


def test_random_heap_deterministic():
    assert random_heap(DEFAULT_UNIVERSE, 0) == random_heap(DEFAULT_UNIVERSE, 0)
    assert random_heap(DEFAULT_UNIVERSE, 1) == random_heap(DEFAULT_UNIVERSE, 1)


def test_random_heap_always_valid():
    for seed in range(1000):
        h = random_heap(DEFAULT_UNIVERSE, seed)
        assert h.is_wellformed()
        assert len(h) <= DEFAULT_UNIVERSE.max_edges


def test_random_heap_covers_the_support():
    u = UniverseSpec((Location("a"), Location("b")), (PLAIN,), (), 4)
    support = set(enumerate_heaps(u))
    seen = {random_heap(u, seed) for seed in range(10_000)}
    assert seen == support


def test_universe_parsing_roundtrip():
    u = parse_universe("locations=a,b locations=a,b labels=eps,f atoms=nil max_edges=3")
    assert u.locations == (Location("a"), Location("b"))
    assert u.labels == (PLAIN, FieldLabel("f"))
    assert u.max_edges == 3
    again = parse_universe(u.describe())
    assert again == u


def test_universe_rejects_duplicates():
    with pytest.raises(ValueError):
        UniverseSpec((Location("a"), Location("a")), (PLAIN,), (), 1)


SMALL = UniverseSpec((Location("a"), Location("b")), (PLAIN,), (NIL,), 2)


def test_oracle_commutativity_instances():
    assert oracle_equiv(P("x |-> y * y |-> z"), P("y |-> z * x |-> y"), SMALL)


def test_oracle_true_vs_emp():
    assert not oracle_equiv(P("true"), P("emp"), SMALL)


def test_oracle_identity_instance():
    assert oracle_equiv(P("x |-> y * emp"), P("x |-> y"), SMALL)


def test_oracle_no_common_reading_is_inequivalent():
    assert not oracle_equiv(P("true(a)"), P("(a |-> b)^-1"), SMALL)


def test_oracle_equiv_is_an_equivalence_relation():
    # within one comparison domain; across domains equivalence is partial
    from strictheap.formula import contains_inv

    rng = random.Random(31337)
    pool = []
    while len(pool) < 12:
        f = random_formula(rng, rng.randint(1, 4))
        if not contains_inv(f):
            pool.append(f)
    heaps = model_heaps(SMALL)
    rel = {}
    for i, f1 in enumerate(pool):
        for j, f2 in enumerate(pool):
            rel[i, j] = oracle_equiv(f1, f2, SMALL, heaps=heaps)
    for i in range(len(pool)):
        assert rel[i, i]  # reflexive
    for i in range(len(pool)):
        for j in range(len(pool)):
            assert rel[i, j] == rel[j, i]  # symmetric
            for k in range(len(pool)):
                if rel[i, j] and rel[j, k]:
                    assert rel[i, k]  # transitive


def test_oracle_handles_recursive_predicates():
    defs = parse_defs("def list(x) = emp + ex y . x |-> y * list(y)")
    assert oracle_equiv(P("list(q) * emp"), P("list(q)"), SMALL, defs=defs)
