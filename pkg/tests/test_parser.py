import random

import pytest

from strictheap.heap import FieldLabel, NIL, PLAIN
from strictheap.formula import (
    Call,
    Conj,
    Disj,
    EMP,
    Exists,
    Inv,
    Path,
    PointsTo,
    Sym,
    TrueOf,
    free_symbols,
    print_formula,
)
from strictheap.parser import (
    DuplicateDefinition,
    ParseError,
    UnboundSymbol,
    parse_def_line,
    parse_defs,
    parse_formula,
    parse_formula_file,
)
from strictheap.oracle import random_formula


def test_precedence_conj_binds_tighter():
    f = parse_formula("a |-> b * c |-> d + e |-> f")
    assert isinstance(f, Disj)
    assert isinstance(f.left, Conj)
    assert isinstance(f.right, PointsTo)


def test_precedence_mirror():
    f = parse_formula("a |-> b + c |-> d * e |-> f")
    assert isinstance(f, Disj)
    assert isinstance(f.left, PointsTo)
    assert isinstance(f.right, Conj)


def test_path_parses_left_associated():
    f = parse_formula("a.f1.f2 |-> x")
    assert f == PointsTo(Path(Sym("a"), "f1"), FieldLabel("f2"), Sym("x"))


def test_single_field_goes_to_label():
    assert parse_formula("a.f |-> x") == PointsTo(Sym("a"), FieldLabel("f"), Sym("x"))


def test_plain_points_to():
    assert parse_formula("a |-> nil") == PointsTo(Sym("a"), PLAIN, NIL)


def test_postfix_inversion():
    assert parse_formula("emp^-1") == Inv(EMP)
    assert parse_formula("((a |-> b)^-1)^-1") == Inv(Inv(PointsTo(Sym("a"), PLAIN, Sym("b"))))


def test_existential_swallows_right():
    f = parse_formula("ex y . x |-> y * list(y)")
    assert isinstance(f, Exists)
    assert isinstance(f.body, Conj)


def test_true_parameterized():
    assert parse_formula("true(a)") == TrueOf(Sym("a"))


def test_call_arguments():
    f = parse_formula("seg(a, b, nil, 3)")
    assert isinstance(f, Call)
    assert len(f.args) == 4


def test_parse_error_carries_position():
    with pytest.raises(ParseError) as e:
        parse_formula("a |-> b *")
    assert e.value.line == 1
    assert e.value.col == 10
    assert e.value.expected


def test_parse_error_expected_set():
    with pytest.raises(ParseError) as e:
        parse_formula("* a |-> b")
    assert "emp" in e.value.expected


def test_defs_recursive_list():
    defs = parse_defs("def list(x) = emp + ex y . x |-> y * list(y)")
    d = defs["list"]
    assert d.params == ("x",)
    assert "list" in {c.pred for c in _calls(d.body)}


def _calls(f):
    from strictheap.formula import subformulas

    return [g for g in subformulas(f) if isinstance(g, Call)]


def test_defs_object_predicate():
    defs = parse_defs("def pair(a) = a.fst |-> nil * true(a)")
    assert free_symbols(defs["pair"].body) == {"a"}


def test_defs_reject_duplicates():
    with pytest.raises(DuplicateDefinition):
        parse_defs("def p(x) = emp\ndef p(y) = emp")


def test_defs_reject_unbound_symbol():
    with pytest.raises(UnboundSymbol) as e:
        parse_def_line("def bad(x) = y |-> nil")
    assert e.value.symbol == "y"
    assert e.value.pred == "bad"


def test_ex_bound_symbols_are_not_free():
    parse_def_line("def ok(x) = ex y . x |-> y")  # should not raise


def test_formula_file_mixes_defs_and_queries():
    ff = parse_formula_file(
        """# header comment
def list(x) = emp + ex y . x |-> y * list(y)
check list(a)
query a |-> b
a |-> nil
"""
    )
    assert set(ff.defs) == {"list"}
    assert [k for k, _ in ff.queries] == ["check", "query", "query"]


def test_roundtrip_fixed_vectors():
    vectors = [
        "a |-> b * emp",
        "a |-> b * c |-> d + e |-> f",
        "(a |-> b * b |-> c)^-1",
        "(a |-> b + emp) * true",
        "ex y . a |-> y * (emp + b |-> y)",
        "a.f.g |-> nil",
        "true(a) * a.f1 |-> x",
        "p(a, b) * (q(nil) + emp)",
    ]
    for text in vectors:
        f = parse_formula(text)
        assert parse_formula(print_formula(f)) == f


def test_roundtrip_random_asts():
    rng = random.Random(20240917)
    for _ in range(2000):
        f = random_formula(rng, rng.randint(1, 9))
        assert parse_formula(print_formula(f)) == f
