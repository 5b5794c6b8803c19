"""Command line entry point: ``folires <command> ...``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional

from .complex import ComplexError, validate_sequence
from .dualgraph import build_dual_graph, export_dot
from .nodal import nodal_components
from .scenarios.fileformat import ParseError, parse_scenario, render_scenario
from .scenarios.generator import MODES, GenerationError, GeneratorParams, darboux_jouanolou, random_scenario
from .scenarios.report import SELECTIONS, render_report, render_scenario_hits, run_audits
from .separatrix import incomplete_points, partial_separatrices


class _Fail(Exception):
    def __init__(self, message: str, code: int = 2):
        super().__init__(message)
        self.code = code


def _load(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _Fail(f"cannot read {path}: {exc}") from None
    try:
        cx = parse_scenario(text)
    except ParseError as exc:
        raise _Fail(f"{path}: {exc}") from None
    return cx


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def cmd_validate(args) -> int:
    cx = _load(args.file)
    errors = validate_sequence(cx)
    for e in errors:
        _emit(f"{e}\n", None)
    if errors:
        return 2
    _emit(f"valid: {cx.N} blow-ups\n", None)
    return 0


def cmd_report(args) -> int:
    cx = _load(args.file)
    try:
        _emit(render_report(cx, audits=args.audits, level=args.level,
                            intermediate=not args.final_graph_only), None)
    except ComplexError as exc:
        raise _Fail(str(exc)) from None
    return 0


def cmd_dot(args) -> int:
    cx = _load(args.file)
    k = cx.N if args.level is None else args.level
    if not 0 <= k <= cx.N:
        raise _Fail(f"level {k} out of range 0..{cx.N}")
    try:
        g = build_dual_graph(cx, k)
        seps = partial_separatrices(cx)
        inc = {p for p, _ in incomplete_points(cx, k)}
        lv = cx.level(k)
        touched = {e for s in seps for m in s.members for p in cx.points_on(cx.N, m)
                   for e in cx.level().points[p].components}
        ann = {
            "nodal": {c for nc in nodal_components(cx) for c in nc.members},
            "separatrix": {v for v in g.vertices if v in touched},
            "incomplete": {v for v in g.vertices if any(v in lv.points[p].components for p in inc)},
        }
    except ComplexError as exc:
        raise _Fail(str(exc)) from None
    _emit(export_dot(g, ann), args.output)
    return 0


def cmd_check(args) -> int:
    cx = _load(args.file)
    errors = validate_sequence(cx)
    if errors:
        for e in errors:
            _emit(f"invalid: {e}\n", None)
        return 2
    results = run_audits(cx, "all", intermediate=not args.final_graph_only)
    failed = False
    for name, violations in results.items():
        _emit(f"{'PASS' if not violations else 'FAIL'} {name}\n", None)
        for v in violations:
            _emit(f"  {v}\n", None)
        failed |= bool(violations)
    return 1 if failed else 0


def cmd_gen(args) -> int:
    try:
        if args.dj is not None:
            cx = darboux_jouanolou(args.dj)
        else:
            cx = random_scenario(GeneratorParams(seed=args.seed, mode=args.mode))
    except (GenerationError, ValueError) as exc:
        raise _Fail(str(exc)) from None
    _emit(render_scenario(cx), args.output)
    return 0


def cmd_scenarios(args) -> int:
    cx = _load(args.file)
    try:
        _emit(render_scenario_hits(cx), None)
    except ComplexError as exc:
        raise _Fail(str(exc)) from None
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="folires", description="Audit resolution complexes of foliations.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check the blow-up sequence")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("report", help="full report with audits")
    p.add_argument("file")
    p.add_argument("--level", type=int)
    p.add_argument("--audits", choices=SELECTIONS, default="all")
    p.add_argument("--final-graph-only", action="store_true",
                   help="check circular chains on the final dual graph only")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("dot", help="dual graph in DOT format")
    p.add_argument("file")
    p.add_argument("--level", type=int)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_dot)

    p = sub.add_parser("check", help="exit 0 if every audit passes, 1 on audit failure, 2 on invalid input")
    p.add_argument("file")
    p.add_argument("--final-graph-only", action="store_true",
                   help="check circular chains on the final dual graph only")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("gen", help="generate a scenario file")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--dj", type=int, metavar="M")
    src.add_argument("--random", action="store_true")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--mode", choices=MODES, default="free")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("scenarios", help="scenario A/B/C hits per level")
    p.add_argument("file")
    p.set_defaults(func=cmd_scenarios)
    return ap


def main(argv: Optional[list[str]] = None) -> int:
    for stream in (sys.stdout, sys.stderr):
        if hasattr(stream, "reconfigure"):
            stream.reconfigure(encoding="utf-8", newline="\n")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _Fail as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
