import pytest

from strictheap.heap import (
    Atom,
    Edge,
    FieldLabel,
    Heap,
    HeapFormatError,
    Location,
    NIL,
    PLAIN,
    StackEnv,
    components,
    format_heap_text,
    parse_heap_text,
    validate_heap,
)

from helpers import heap, stack


def kinds(report):
    return sorted({v.kind for v in report})


def test_rooted_two_cell_list_is_valid():
    report = validate_heap(heap("a->b", "b->nil"), stack(x="a"))
    assert report == []


def test_unrooted_heap_reports_unreachable_vertices():
    report = validate_heap(heap("a->b"), StackEnv.of({}))
    assert "unreachable" in kinds(report)
    assert "unrooted-component" in kinds(report)
    names = " ".join(v.detail for v in report)
    assert "a" in names and "b" in names


def test_duplicate_cell_assignment_is_reported():
    h = Heap(frozenset({
        Edge(Location("a"), PLAIN, Location("b")),
        Edge(Location("a"), PLAIN, Location("c")),
    }))
    assert "duplicate-cell" in kinds(validate_heap(h, stack(x="a")))


def test_mixed_plain_and_field_labels_reported():
    h = heap("a->b", "a.f->c")
    assert "mixed-labels" in kinds(validate_heap(h, stack(x="a")))


def test_shared_target_is_fine():
    # m:1 sharing is allowed
    report = validate_heap(heap("a->c", "b->c", "c->nil"), stack(x="a", y="b"))
    assert report == []


def test_backward_cell_is_directed_unreachable_but_rooted():
    # b points INTO the rooted region but nothing reaches b
    report = validate_heap(heap("a->nil", "b->a"), stack(x="a"))
    assert kinds(report) == ["unreachable"]


def test_vertices_exclude_atoms():
    h = heap("a->nil", "b->7")
    assert h.vertices == frozenset({Location("a"), Location("b")})


@pytest.mark.parametrize(
    "specs,expected",
    [
        (("a->b", "b->c"), 1),
        (("a->b", "c->d"), 2),
        ((), 0),
        (("a->nil", "b->nil"), 2),  # nil is not a joining vertex
        (("a->c", "b->c"), 1),      # shared location target joins
    ],
)
def test_component_counts(specs, expected):
    assert len(components(heap(*specs))) == expected


def test_components_partition_edges():
    h = heap("a->b", "c->d", "d->e", "f->nil")
    comps = components(h)
    union = frozenset(e for c in comps for e in c.edges)
    assert union == h.edges
    seen = set()
    for c in comps:
        assert not (set(c.vertices) & seen)
        seen |= set(c.vertices)


def test_heap_text_roundtrip():
    text = """# sample
stack x -> a
stack y -> c
a -> b
b -> nil
c .f -> 3
c .g -> a
"""
    h, s = parse_heap_text(text)
    assert len(h) == 4
    assert s.as_dict()["y"] == Location("c")
    h2, s2 = parse_heap_text(format_heap_text(h, s))
    assert h2 == h and s2 == s


def test_heap_text_rejects_garbage():
    with pytest.raises(HeapFormatError):
        parse_heap_text("a -> ")
    with pytest.raises(HeapFormatError):
        parse_heap_text("stack x a")
    with pytest.raises(HeapFormatError):
        parse_heap_text("a => b")


def test_atom_values_parse():
    h, _ = parse_heap_text("a -> nil\nb -> 42\n")
    targets = {e.target for e in h.edges}
    assert targets == {NIL, Atom(42)}
