"""Ground connection algebra and literal evaluation."""

import itertools

import pytest

from strictheap.heap import Edge, Location, PLAIN
from strictheap.parser import parse_defs, parse_formula
from strictheap.semantics import (
    EMPTY_SIGNED,
    EvalError,
    FALSE,
    FuelExhausted,
    SignedHeap,
    UndefinedPredicate,
    conjoin,
    conjoin_chain,
    desugar_points_to,
    disjoin,
    eval_ground,
)
from strictheap.formula import Conj, Exists, PointsTo, print_formula

from helpers import edge, heap, loc


def sh(*specs):
    return SignedHeap({edge(s): 1 for s in specs})


AB = sh("a->b")
AD = sh("a->d")
BC = sh("b->c")
CD = sh("c->d")


def ev(text, defs=None, fuel=8, universe=None):
    d = parse_defs(defs) if defs else None
    u = [Location(x) for x in universe] if universe else None
    return eval_ground(parse_formula(text), defs=d, fuel=fuel, universe=u)


# conjoin ----------------------------------------------------------------


def test_same_cell_twice_is_false_regardless_of_targets():
    assert conjoin(AB, AD) is FALSE
    assert conjoin(AB, sh("a->b")) is FALSE  # identical edge is no better


def test_emp_is_identity():
    assert conjoin(AB, EMPTY_SIGNED) == AB
    assert conjoin(EMPTY_SIGNED, AB) == AB


def test_unrelated_heaps_do_not_connect():
    assert conjoin(AB, CD) is FALSE


def test_one_joining_point_connects():
    assert conjoin(AB, BC) == sh("a->b", "b->c")


def test_two_joining_points_are_too_many():
    assert conjoin(sh("a->b"), sh("b->a")) is FALSE


def test_cancellation_to_emp():
    g = conjoin(AB, BC)
    assert conjoin(g, g.negate()) == EMPTY_SIGNED


def test_partial_cancellation_keeps_connected_rest():
    g = conjoin(AB, BC)  # {a->b, b->c}
    assert conjoin(g, BC.negate()) == AB


def test_partial_cancellation_that_disconnects_is_false():
    g = conjoin_chain([AB, BC, CD])  # chain a-b-c-d
    # removing the middle edge would split the heap in two
    assert conjoin(g, BC.negate()) is FALSE


def test_removing_an_absent_edge_is_false():
    assert conjoin(AB, BC.negate()) is FALSE


def test_negative_pairs_mirror_positive_pairs():
    for x, y in [(AB, BC), (AB, AD), (AB, CD)]:
        pos = conjoin(x, y)
        neg = conjoin(x.negate(), y.negate())
        if pos is FALSE:
            assert neg is FALSE
        else:
            assert neg == pos.negate()


def test_object_fields_connect_through_their_object():
    f1 = sh("a.f->x")
    f2 = sh("a.g->y")
    assert conjoin(f1, f2) == sh("a.f->x", "a.g->y")


def test_plain_and_field_cell_on_same_source_is_false():
    assert conjoin(sh("a->b"), sh("a.f->x")) is FALSE


def test_nil_is_not_a_joining_point():
    assert conjoin(sh("a->nil"), sh("b->nil")) is FALSE


# conjoin_chain ------------------------------------------------------------


def test_chain_connects_out_of_order():
    r = conjoin_chain([BC, AB, CD])
    assert r == sh("a->b", "b->c", "c->d")


def test_chain_triangle_is_false():
    assert conjoin_chain([sh("a->b"), sh("b->c"), sh("c->a")]) is FALSE


def test_chain_singleton_emp():
    assert conjoin_chain([EMPTY_SIGNED]) == EMPTY_SIGNED


def test_chain_rejects_empty_input():
    with pytest.raises(ValueError):
        conjoin_chain([])


def test_chain_confluence_small():
    pieces = [sh("a->b"), sh("b->c"), sh("c->d")]
    results = {conjoin_chain(list(p)) for p in itertools.permutations(pieces)}
    assert len(results) == 1


# disjoin --------------------------------------------------------------------


def test_disjoin_requires_independence():
    assert disjoin(AB, CD) == sh("a->b", "c->d")
    assert disjoin(AB, BC) is FALSE
    assert disjoin(AB, EMPTY_SIGNED) == AB


def test_disjoin_mixed_signs_is_false():
    assert disjoin(AB, CD.negate()) is FALSE


# eval ------------------------------------------------------------------------


def test_eval_cancel():
    assert ev("a |-> b * (a |-> b)^-1") == EMPTY_SIGNED


def test_eval_emp_inverse():
    assert ev("emp^-1") == EMPTY_SIGNED


def test_eval_inversion_distributes():
    assert ev("((a |-> b) * (b |-> c))^-1") == ev("(a |-> b)^-1 * (b |-> c)^-1")


def test_eval_strictness_vectors():
    assert ev("a |-> b * a |-> d") is FALSE
    assert ev("a |-> b * c |-> d") is FALSE
    assert ev("a |-> b * b |-> c") == sh("a->b", "b->c")


def test_eval_is_bracketing_insensitive():
    assert ev("a |-> b * (c |-> d * b |-> c)") == ev("(a |-> b * b |-> c) * c |-> d")


def test_eval_false_absorbs():
    assert ev("false * a |-> b") is FALSE
    assert ev("false + a |-> b") is FALSE


def test_eval_rejects_absorbers():
    with pytest.raises(EvalError):
        ev("true * a |-> b")
    with pytest.raises(EvalError):
        ev("true(a)")


def test_eval_undefined_predicate():
    with pytest.raises(UndefinedPredicate):
        ev("mystery(a)")


def test_eval_fuel_exhaustion():
    with pytest.raises(FuelExhausted):
        ev("loop(a)", defs="def loop(x) = loop(x)", fuel=5)


def test_eval_existential_ranges_over_universe():
    r = ev("ex y . a |-> y", universe=["a", "b"])
    assert r == sh("a->a")  # first location in declared order that works
    with pytest.raises(EvalError):
        ev("ex y . a |-> y")  # no universe declared


def test_eval_predicate_unfolding():
    r = ev("cell(a)", defs="def cell(x) = x |-> nil")
    assert r == sh("a->nil")


def test_eval_path_desugars_and_claims_prefix():
    r = ev("a.f.g |-> x", universe=["a", "b", "c"])
    assert r is not FALSE
    h = r.to_heap()
    assert len(h) == 2
    labels = sorted(e.label.name for e in h.edges)
    assert labels == ["f", "g"]


# desugaring ---------------------------------------------------------------


def test_desugar_single_hop_stays_flat():
    pt = parse_formula("a.f |-> x")
    assert desugar_points_to(pt) == pt


def test_desugar_two_hop():
    pt = parse_formula("a.f1.f2 |-> x")
    out = desugar_points_to(pt)
    assert print_formula(out) == "ex t1 . a.f1 |-> t1 * t1.f2 |-> x"


def test_desugar_three_hop_nests_left():
    pt = parse_formula("a.f.g.h |-> x")
    out = desugar_points_to(pt)
    assert isinstance(out, Exists)
    assert isinstance(out.body, Conj)
    assert isinstance(out.body.left, Exists)  # the inner chain sits on the left


def test_desugar_avoids_capture():
    pt = parse_formula("t1.f.g |-> t2")
    out = desugar_points_to(pt)
    text = print_formula(out)
    assert "ex t3 ." in text  # t1, t2 are taken
