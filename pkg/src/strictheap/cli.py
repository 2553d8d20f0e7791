"""Command-line front end.

Subcommands: check (heap satisfies formula), eval (ground evaluation),
simplify (normal form), invert (push inversions down), equiv (equivalence
with witness), laws (the algebraic law suite), frame (apply a contract).

Exit codes: 0 success / sat / equivalent; 1 unsat / inequivalent /
verification failure; 2 parse or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from .heap import (
    Heap,
    HeapFormatError,
    StackEnv,
    format_heap,
    format_value,
    parse_heap_text,
    validate_heap,
    value_key,
)
from .formula import print_formula
from .parser import (
    DuplicateDefinition,
    ParseError,
    UnboundSymbol,
    parse_defs,
    parse_formula,
    parse_formula_file,
)
from .semantics import (
    DEFAULT_FUEL,
    EvalError,
    FuelExhausted,
    InversionNotMatchable,
    eval_ground,
    format_result,
    match,
)
from .algebra import equivalent_with_witness, normalize, push_inversion
from .oracle import DEFAULT_UNIVERSE, UniverseSpec, UniverseTooLarge, load_universe_file, parse_universe
from .verifier import (
    FreshLocationExhausted,
    InversionInSpec,
    VerificationFailure,
    frame_apply,
    parse_spec_file,
)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_ERROR = 2


class _Output:
    """Collects line output and the JSON result object side by side."""

    def __init__(self, command: str, as_json: bool):
        self.command = command
        self.as_json = as_json
        self.obj: dict = {"command": command, "verdict": None, "diagnostics": []}

    def line(self, text: str) -> None:
        if not self.as_json:
            print(text)

    def diag(self, text: str) -> None:
        self.obj["diagnostics"].append(text)
        if not self.as_json:
            print(text, file=sys.stderr)

    def finish(self, verdict: str, code: int, **fields) -> int:
        self.obj["verdict"] = verdict
        self.obj.update(fields)
        if self.as_json:
            print(json.dumps(self.obj, indent=2, sort_keys=True))
        return code


def _load_universe(arg: Optional[str]) -> UniverseSpec:
    if arg is None:
        return DEFAULT_UNIVERSE
    if arg.startswith("@"):
        return load_universe_file(Path(arg[1:]).read_text())
    return parse_universe(arg)


def _load_defs(args) -> dict:
    defs = {}
    if args.defs:
        defs.update(parse_defs(Path(args.defs).read_text()))
    return defs


def _merge_defs(base: dict, extra: dict) -> dict:
    for name, d in extra.items():
        if name in base and base[name] != d:
            raise DuplicateDefinition(name, 0)
        base[name] = d
    return base


def _load_heap(path: str, out: _Output) -> tuple[Heap, StackEnv]:
    h, s = parse_heap_text(Path(path).read_text())
    for v in validate_heap(h, s):
        out.diag(f"heap warning: {v}")
    return h, s


def _binding_json(b) -> dict:
    return {k: format_value(v) for k, v in b.env}


def _cmd_check(args, out: _Output) -> int:
    h, s = _load_heap(args.heapfile, out)
    ff = parse_formula_file(Path(args.formulafile).read_text())
    defs = _merge_defs(_load_defs(args), ff.defs)
    if not ff.queries:
        out.diag("no check/query lines in the formula file")
        return out.finish("error", EXIT_ERROR)
    all_sat = True
    bindings_json = []
    for _, f in ff.queries:
        bs = sorted(
            match(f, h, s, defs=defs, fuel=args.fuel),
            key=lambda b: tuple((k, value_key(v)) for k, v in b.env),
        )
        if bs:
            shown = " ".join(repr(b) for b in bs)
            out.line(f"sat {print_formula(f)} :: {shown}")
        else:
            all_sat = False
            out.line(f"unsat {print_formula(f)}")
        bindings_json.append([_binding_json(b) for b in bs])
    verdict = "sat" if all_sat else "unsat"
    return out.finish(verdict, EXIT_OK if all_sat else EXIT_NEGATIVE, bindings=bindings_json)


def _cmd_eval(args, out: _Output) -> int:
    ff = parse_formula_file(Path(args.formulafile).read_text())
    defs = _merge_defs(_load_defs(args), ff.defs)
    universe = _load_universe(args.universe)
    if not ff.queries:
        out.diag("no check/query lines in the formula file")
        return out.finish("error", EXIT_ERROR)
    results = []
    for _, f in ff.queries:
        r = eval_ground(f, defs=defs, fuel=args.fuel, universe=universe.locations)
        results.append(format_result(r))
        out.line(format_result(r))
    return out.finish("evaluated", EXIT_OK, results=results)


def _cmd_simplify(args, out: _Output) -> int:
    ff = parse_formula_file(Path(args.formulafile).read_text())
    results = []
    for _, f in ff.queries:
        nf = normalize(f)
        results.append(print_formula(nf))
        out.line(print_formula(nf))
    if not ff.queries:
        out.diag("no check/query lines in the formula file")
        return out.finish("error", EXIT_ERROR)
    return out.finish("simplified", EXIT_OK, results=results)


def _cmd_invert(args, out: _Output) -> int:
    ff = parse_formula_file(Path(args.formulafile).read_text())
    results = []
    for _, f in ff.queries:
        g = push_inversion(f)
        results.append(print_formula(g))
        out.line(print_formula(g))
    if not ff.queries:
        out.diag("no check/query lines in the formula file")
        return out.finish("error", EXIT_ERROR)
    return out.finish("inverted", EXIT_OK, results=results)


def _cmd_equiv(args, out: _Output) -> int:
    f1 = parse_formula(args.formula1)
    f2 = parse_formula(args.formula2)
    defs = _load_defs(args)
    universe = _load_universe(args.universe)
    ok, witness, why = equivalent_with_witness(f1, f2, universe, defs=defs, fuel=args.fuel)
    if ok:
        out.line(f"equivalent ({why})")
        return out.finish("equivalent", EXIT_OK)
    out.line(f"inequivalent ({why})")
    wit_text = None
    if witness is not None:
        wit_text = format_heap(witness)
        out.line(f"witness {wit_text}")
    return out.finish("inequivalent", EXIT_NEGATIVE, witness=wit_text)


def _cmd_laws(args, out: _Output) -> int:
    from .laws import check_confluence, check_tree_characterization, run_laws

    universe = _load_universe(args.universe)
    results = run_laws(universe, seed=args.seed)
    if args.full:
        results.append(check_confluence(universe))
        results.append(check_tree_characterization())
    all_ok = True
    lines = []
    for r in results:
        lines.append(r.line())
        out.line(r.line())
        all_ok = all_ok and r.ok
    return out.finish(
        "laws passed" if all_ok else "laws failed",
        EXIT_OK if all_ok else EXIT_NEGATIVE,
        results=lines,
    )


def _cmd_frame(args, out: _Output) -> int:
    h, s = _load_heap(args.heapfile, out)
    specs = parse_spec_file(Path(args.specfile).read_text())
    if args.name not in specs:
        out.diag(f"no contract named {args.name!r} in {args.specfile}")
        return out.finish("error", EXIT_ERROR)
    defs = _load_defs(args)
    universe = _load_universe(args.universe) if args.universe else None
    try:
        result = frame_apply(specs[args.name], h, s, defs=defs, fuel=args.fuel, universe=universe)
    except VerificationFailure as e:
        out.diag(f"verification failure: {e.cause}")
        return out.finish("verification failure", EXIT_NEGATIVE)
    out.line(format_heap(result))
    return out.finish("applied", EXIT_OK, results=[format_heap(result)])


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="strictheap",
        description="Strict heap-separating points-to logic toolkit",
    )
    ap.add_argument("--json", action="store_true", help="emit one machine-readable result object")
    ap.add_argument("--fuel", type=int, default=DEFAULT_FUEL, help="predicate unfolding depth bound")
    ap.add_argument("--defs", help="file of predicate definitions")
    ap.add_argument("--universe", help="universe spec (or @file), e.g. 'locations=a,b,c labels=eps,f,g atoms=nil max_edges=4'")
    ap.add_argument("--seed", type=int, default=0, help="seed for sampled checks")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="does a heap satisfy the formulas?")
    p.add_argument("heapfile")
    p.add_argument("formulafile")
    p.set_defaults(fn=_cmd_check)

    p = sub.add_parser("eval", help="evaluate ground formulas to heaps")
    p.add_argument("formulafile")
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("simplify", help="print normal forms")
    p.add_argument("formulafile")
    p.set_defaults(fn=_cmd_simplify)

    p = sub.add_parser("invert", help="push inversions to the leaves")
    p.add_argument("formulafile")
    p.set_defaults(fn=_cmd_invert)

    p = sub.add_parser("equiv", help="decide equivalence of two formulas")
    p.add_argument("formula1")
    p.add_argument("formula2")
    p.set_defaults(fn=_cmd_equiv)

    p = sub.add_parser("laws", help="run the algebraic law suite")
    p.add_argument("--full", action="store_true", help="also run confluence and the tree characterization")
    p.set_defaults(fn=_cmd_laws)

    p = sub.add_parser("frame", help="apply a named contract to a heap")
    p.add_argument("heapfile")
    p.add_argument("specfile")
    p.add_argument("name")
    p.set_defaults(fn=_cmd_frame)

    return ap


def run_cli(argv: Optional[list[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    out = _Output(args.command, args.json)
    try:
        return args.fn(args, out)
    except FuelExhausted as e:
        out.diag(f"fuel exhausted: {e}")
        return out.finish("verification failure", EXIT_NEGATIVE)
    except (
        ParseError,
        DuplicateDefinition,
        UnboundSymbol,
        HeapFormatError,
        InversionInSpec,
        UniverseTooLarge,
        EvalError,
        InversionNotMatchable,
        FreshLocationExhausted,
        FileNotFoundError,
        ValueError,
    ) as e:
        out.diag(f"error: {e}")
        return out.finish("error", EXIT_ERROR)


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
