"""Human-readable audit reports with a key-value twin."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional

from ..complex import Complex, ComplexError, natkey, natsorted, validate_sequence
from ..dualgraph import audit_circular_chains, build_dual_graph
from ..index import (
    Violation,
    check_corner_reciprocity,
    check_dicritical_restriction,
    check_line_sums,
    check_trace_transition,
    check_triple_relations,
)
from ..nodal import audit_nodal_transitions, detect_scenarios, nodal_components, persistency_audit
from ..separatrix import audit_completeness, audit_separatrix_indices, partial_separatrices

SELECTIONS = ("all", "index", "separatrix", "nodal")


def _safe(name: str, fn: Callable[[Complex], list]) -> Callable[[Complex], list]:
    def run(cx: Complex) -> list:
        try:
            return list(fn(cx))
        except ComplexError as exc:
            return [Violation(name, "-", f"audit aborted: {exc}")]
    return run


def _dual_graphs(cx: Complex, intermediate: bool = True) -> list[Violation]:
    out = []
    for k in (range(cx.N + 1) if intermediate else [cx.N]):
        for v in audit_circular_chains(build_dual_graph(cx, k), seed=k):
            out.append(Violation(v.audit, f"{v.entity}@{k}", v.message))
    return out


def audit_units(selection: str = "all", intermediate: bool = True) -> list[tuple[str, Callable[[Complex], list]]]:
    """Named audit callables; ``intermediate=False`` checks only the final dual graph."""
    if selection not in SELECTIONS:
        raise ValueError(f"unknown audit selection {selection!r}")
    groups = {
        "index": [
            ("reciprocity", check_corner_reciprocity),
            ("triple", check_triple_relations),
            ("dicritical_restriction", check_dicritical_restriction),
            ("line_sums", check_line_sums),
            ("trace_transition", check_trace_transition),
            ("circular_chains", lambda cx: _dual_graphs(cx, intermediate)),
        ],
        "separatrix": [
            ("separatrix_index", audit_separatrix_indices),
            ("completeness", audit_completeness),
        ],
        "nodal": [
            ("nodal_transitions", audit_nodal_transitions),
            ("persistency", lambda cx: persistency_audit(cx).violations),
        ],
    }
    if selection == "all":
        return [u for g in ("index", "separatrix", "nodal") for u in groups[g]]
    return groups[selection]


def worker_count(workers: Optional[int] = None) -> int:
    if workers is None:
        try:
            workers = int(os.environ.get("FOLIRES_WORKERS", "4"))
        except ValueError:
            workers = 4
    return max(1, workers)


def run_audits(cx: Complex, selection: str = "all", workers: Optional[int] = None,
               intermediate: bool = True) -> dict[str, list[Violation]]:
    """Run the selected audit units; results come back in unit order."""
    units = audit_units(selection, intermediate)
    with ThreadPoolExecutor(max_workers=worker_count(workers)) as pool:
        futures = [(name, pool.submit(_safe(name, fn), cx)) for name, fn in units]
        return {name: sorted(f.result(), key=lambda v: (v.audit, natkey(v.entity), v.message))
                for name, f in futures}


def _census(cx: Complex, k: int) -> dict[str, int]:
    lv = cx.level(k)
    comps = lv.components.values()
    curves = lv.curves.values()
    return {
        "components": len(lv.components),
        "dicritical": sum(1 for c in comps if not c.invariant),
        "curves": len(lv.curves),
        "corner": sum(1 for c in curves if c.kind == "corner"),
        "trace": sum(1 for c in curves if c.kind == "trace"),
        "points": len(lv.points),
        "singstar": len(lv.singstar),
    }


def render_report(cx: Complex, audits: str = "all", level: Optional[int] = None,
                  workers: Optional[int] = None, intermediate: bool = True) -> str:
    lines: list[str] = []
    kv: list[str] = []
    levels = range(cx.N + 1) if level is None else [level]
    if level is not None and not 0 <= level <= cx.N:
        raise ComplexError(f"level {level} out of range 0..{cx.N}")

    lines.append(f"complex {cx.name}: {cx.N} blow-ups")
    kv.append(f"steps={cx.N}")
    lines.append("census")
    for k in levels:
        c = _census(cx, k)
        lines.append(f"  level {k}: " + ", ".join(f"{key} {v}" for key, v in c.items()))
        kv.extend(f"census.{k}.{key}={v}" for key, v in c.items())

    if cx.N == 0:
        return "\n".join(lines + ["", "[key-value]"] + kv) + "\n"

    errors = validate_sequence(cx)
    lines.append(f"validity: {'PASS' if not errors else 'FAIL'}")
    lines.extend(f"  {e}" for e in errors)
    kv.append(f"validity={'pass' if not errors else 'fail'}")
    if errors:
        return "\n".join(lines + ["", "[key-value]"] + kv) + "\n"

    seps = partial_separatrices(cx)
    incomplete = sum(1 for s in seps if not s.complete)
    lines.append(f"separatrices: {len(seps)} (incomplete: {incomplete})")
    kv += [f"separatrices={len(seps)}", f"separatrices.incomplete={incomplete}"]
    for s in seps:
        kind, part = s.compact_part
        shown = part if kind == "point" else ",".join(part)
        lines.append(f"  {s.id}  size {len(s.members)}  {s.status}  compact part {kind} {shown}")
        kv += [f"separatrix.{s.id}.size={len(s.members)}", f"separatrix.{s.id}.status={s.status}",
               f"separatrix.{s.id}.compact_part={kind}:{shown}"]

    # a broken index can make classification impossible; the audits below say why
    try:
        comps = nodal_components(cx)
    except ComplexError as exc:
        comps = []
        lines.append(f"nodal components: unavailable ({exc})")
        kv.append("nodal_components=-")
    else:
        lines.append(f"nodal components: {len(comps)}")
        kv.append(f"nodal_components={len(comps)}")
    for nc in comps:
        birth = "-" if nc.birth is None else str(nc.birth)
        shape = "uninterrupted" if nc.uninterrupted else "interrupted"
        lines.append(f"  {nc.id}  {nc.status}  {shape}  birth {birth}  members {','.join(nc.members)}")
        kv += [f"nodal.{nc.id}.status={nc.status}", f"nodal.{nc.id}.uninterrupted={str(nc.uninterrupted).lower()}",
               f"nodal.{nc.id}.birth={birth}"]

    if audits in ("all", "nodal"):
        lines.append("scenario hits")
        for nc in comps:
            if not (nc.uninterrupted and nc.complete) or nc.birth is None:
                continue
            for k in levels:
                if k < nc.birth:
                    continue
                hits = detect_scenarios(cx, k, nc)
                for h in hits:
                    lines.append(f"  {nc.id} level {k}: {h.kind} on {h.curve} at {h.point}")
                kv.append(f"hits.{nc.id}.{k}={len(hits)}")

    results = run_audits(cx, audits, workers, intermediate)
    lines.append("audits")
    failed = 0
    for name, violations in results.items():
        status = "PASS" if not violations else "FAIL"
        failed += bool(violations)
        lines.append(f"  {status} {name} ({len(violations)} violations)")
        lines.extend(f"    {v}" for v in violations)
        kv.append(f"audit.{name}={status.lower()}")
    if audits in ("all", "nodal"):
        try:
            res = persistency_audit(cx)
        except ComplexError as exc:
            lines.append(f"persistency verdict: unavailable ({exc})")
            kv.append("verdict=-")
            kv.append(f"audits.failed={failed}")
            return "\n".join(lines + ["", "[key-value]"] + kv) + "\n"
        lines.append(f"persistency verdict: {res.verdict}")
        kv.append(f"verdict={res.verdict}")
        for cid, birth, breaking in res.components:
            lines.append(f"  {cid}: birth {birth}, breaking level {'-' if breaking is None else breaking}")
            kv.append(f"breaking.{cid}={'-' if breaking is None else breaking}")
    kv.append(f"audits.failed={failed}")
    return "\n".join(lines + ["", "[key-value]"] + kv) + "\n"


def render_scenario_hits(cx: Complex) -> str:
    lines = []
    for nc in nodal_components(cx):
        if not (nc.uninterrupted and nc.complete) or nc.birth is None:
            continue
        lines.append(f"{nc.id} (birth {nc.birth})")
        for k in range(nc.birth, cx.N + 1):
            hits = detect_scenarios(cx, k, nc)
            kinds = "".join(sorted({h.kind for h in hits})) or "-"
            lines.append(f"  level {k}: {kinds}")
            for h in hits:
                lines.append(f"    {h.kind} {h.curve} at {h.point} [{' '.join(h.witness)}]")
    if not lines:
        lines.append("no complete uninterrupted nodal component")
    return "\n".join(lines) + "\n"
