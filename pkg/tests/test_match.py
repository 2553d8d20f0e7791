"""Satisfaction matching: partial specs, absorbers, recursive predicates."""

import pytest

from strictheap.heap import EMPTY_STACK, Heap, Location
from strictheap.parser import parse_defs, parse_formula
from strictheap.semantics import (
    FALSE,
    FuelExhausted,
    InversionNotMatchable,
    eval_ground,
    match,
)
from strictheap.formula import free_symbols, subst_formula, Sym
from strictheap.heap import Atom

from helpers import heap, stack

LIST_DEFS = parse_defs("def list(x) = emp + ex y . x |-> y * list(y)")


def m(text, h, s=EMPTY_STACK, defs=None, fuel=8):
    return match(parse_formula(text), h, s, defs=defs, fuel=fuel)


def envs(bindings):
    return {b.env for b in bindings}


def test_absorber_takes_remaining_fields():
    h = heap("a.f1->x", "a.f2->y")
    bs = m("a.f1 |-> x * true(a)", h)
    assert len(bs) == 1
    b = next(iter(bs))
    assert b.claimed == h.edges
    assert dict(b.env)["a"] == Location("a")


def test_second_absorber_for_same_object_takes_nothing():
    h = heap("a.f1->x")
    bs = m("true(a) * true(a)", h)
    assert len(bs) == 1


def test_absorber_order_matters():
    h = heap("a.f1->x")
    # the left absorber eats the f1 cell first, starving the points-to
    assert m("true(a) * a.f1 |-> x", h) == frozenset()
    assert len(m("a.f1 |-> x * true(a)", h)) == 1


def test_emp_matches_only_the_empty_heap():
    assert len(m("emp", heap())) == 1
    assert m("emp", heap("a->b")) == frozenset()


def test_plain_true_matches_any_heap():
    assert len(m("true", heap())) == 1
    assert len(m("true", heap("a->b", "c->nil"))) == 1


def test_false_matches_no_heap():
    assert m("false", heap()) == frozenset()
    assert m("false", heap("a->b")) == frozenset()


def test_points_to_binds_symbols():
    bs = m("x |-> y", heap("a->b"))
    assert envs(bs) == {(("x", Location("a")), ("y", Location("b")))}


def test_stack_pins_symbols():
    bs = m("x |-> y", heap("a->b"), stack(x="a"))
    assert len(bs) == 1
    assert m("x |-> y", heap("a->b"), stack(x="b")) == frozenset()


def test_conjunction_needs_a_joining_point():
    h = heap("a->b", "c->d")
    assert m("a |-> b * c |-> d", h) == frozenset()  # no joint; + is required
    assert len(m("a |-> b + c |-> d", h)) > 0


def test_conjunction_chain_connects_in_any_order():
    h = heap("a->b", "b->c", "c->d")
    # written in an order that cannot claim left to right
    assert len(m("a |-> b * c |-> d * b |-> c", h)) == 1


def test_top_level_must_cover_everything():
    h = heap("a->b", "b->c")
    assert m("a |-> b", h) == frozenset()


def test_disjunction_branches_split_independent_regions():
    # pinning the sources with a stack keeps the binding unique
    h = heap("a->b", "c->d")
    bs = m("a |-> b + c |-> d", h, stack(a="a", c="c"))
    assert len(bs) == 1
    assert next(iter(bs)).claimed == h.edges


def test_disjunction_single_branch_alone():
    # a branch can cover the whole heap by itself
    h = heap("a->b")
    assert len(m("a |-> b + c |-> d", h, stack(a="a", c="c"))) == 1
    assert len(m("c |-> d + a |-> b", h, stack(a="a", c="c"))) == 1


def test_disjunction_rejects_overlapping_branches():
    h = heap("a->b", "b->c")
    assert m("a |-> b + b |-> c", h) == frozenset()


def test_list_predicate_matches_two_cells():
    h = heap("a->b", "b->nil")
    bs = m("list(a)", h, defs=LIST_DEFS, fuel=4)
    assert len(bs) == 1
    assert dict(next(iter(bs)).env) == {"a": Location("a")}


def test_list_predicate_matches_empty():
    assert len(m("list(a)", heap(), defs=LIST_DEFS, fuel=2)) == 1


def test_list_predicate_rejects_forked_heap():
    h = heap("a->b", "c->nil")
    assert m("list(a)", h, defs=LIST_DEFS, fuel=8) == frozenset()


def test_fuel_truncation_is_loud_when_it_matters():
    # a list longer than the unfolding budget: no binding is found and the
    # truncation must not pass as a certified unsat
    h = heap("a->b", "b->c", "c->d", "d->nil")
    with pytest.raises(FuelExhausted):
        m("list(x)", h, stack(x="a"), defs=LIST_DEFS, fuel=3)


def test_fuel_truncation_is_silent_when_matches_exist():
    h = heap("a->b", "b->nil")
    bs = m("list(a)", h, defs=LIST_DEFS, fuel=4)
    assert len(bs) == 1  # deeper unfoldings were cut but the answer stands


def test_inversion_is_not_matchable():
    with pytest.raises(InversionNotMatchable):
        m("(a |-> b)^-1", heap("a->b"))


def test_path_matching_claims_the_whole_path():
    h = heap("a.f->t", "t.g->x")
    bs = m("a.f.g |-> x", h)
    assert len(bs) == 1
    assert next(iter(bs)).claimed == h.edges


def test_existential_binds_locally():
    h = heap("a->b")
    bs = m("ex y . a |-> y", h)
    assert envs(bs) == {(("a", Location("a")),)}  # y does not leak


def test_unused_existential_succeeds():
    assert len(m("ex y . emp", heap())) == 1


def test_match_soundness_against_eval():
    # substituting a binding into an absorber-free formula and evaluating it
    # reproduces exactly the claimed edges
    cases = [
        ("x |-> y * y |-> z", heap("a->b", "b->c")),
        ("x |-> y + w |-> nil", heap("a->b", "c->nil")),
        ("x |-> nil", heap("a->nil")),
    ]
    for text, h in cases:
        f = parse_formula(text)
        for b in match(f, h):
            env = {k: (Sym(v.name) if isinstance(v, Location) else v) for k, v in b.env}
            ground = subst_formula(f, env)
            r = eval_ground(ground)
            assert r is not FALSE
            assert r.to_heap().edges == b.claimed
