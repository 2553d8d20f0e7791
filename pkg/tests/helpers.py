"""Tiny builders shared by the test modules."""

from strictheap.heap import Atom, Edge, FieldLabel, Heap, Location, NIL, PLAIN, StackEnv


def loc(name):
    return Location(name)


def val(token):
    if token == "nil":
        return NIL
    if token.lstrip("-").isdigit():
        return Atom(int(token))
    return Location(token)


def edge(spec):
    """'a->b', 'a.f->x', 'b->nil'"""
    src, _, rest = spec.partition("->")
    src = src.strip()
    if "." in src:
        base, field = src.split(".")
        return Edge(Location(base), FieldLabel(field), val(rest.strip()))
    return Edge(Location(src), PLAIN, val(rest.strip()))


def heap(*specs):
    return Heap(frozenset(edge(s) for s in specs))


def stack(**roots):
    return StackEnv.of({k: Location(v) for k, v in roots.items()})
