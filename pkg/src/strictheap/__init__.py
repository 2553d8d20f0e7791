"""Strict heap-separating points-to logic.

Concrete heap graphs, a connection algebra with inversion over signed edge
multisets, partial-specification matching, a confluent normalizer,
brute-force enumeration oracles, and a frame-rule splitter.
"""

from .heap import (
    Atom,
    Edge,
    EMPTY_HEAP,
    EMPTY_STACK,
    FieldLabel,
    Heap,
    Location,
    NIL,
    PLAIN,
    StackEnv,
    components,
    validate_heap,
)
from .formula import (
    Call,
    Conj,
    Disj,
    EMP,
    Emp,
    Exists,
    FALSE_F,
    FalseHeap,
    Formula,
    Inv,
    Path,
    PointsTo,
    PredicateDef,
    Sym,
    TRUE,
    TrueAny,
    TrueOf,
    print_formula,
)
from .parser import ParseError, parse_defs, parse_formula

__version__ = "0.1.0"

__all__ = [
    "Atom", "Edge", "EMPTY_HEAP", "EMPTY_STACK", "FieldLabel", "Heap",
    "Location", "NIL", "PLAIN", "StackEnv", "components", "validate_heap",
    "Call", "Conj", "Disj", "EMP", "Emp", "Exists", "FALSE_F", "FalseHeap",
    "Formula", "Inv", "Path", "PointsTo", "PredicateDef", "Sym", "TRUE",
    "TrueAny", "TrueOf", "print_formula",
    "ParseError", "parse_defs", "parse_formula",
    "__version__",
]
