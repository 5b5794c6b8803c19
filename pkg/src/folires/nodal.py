"""Nodal components, their transition rules and the persistency audit."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .complex import Complex, ComplexError, image_at, locus_at, natkey, natsorted
from .index import Violation
from .scalar import classify
from .separatrix import (
    _separatrices,
    curves_at,
    incomplete_points,
    is_complete_at,
    points_of,
    separatrix_of,
)


@dataclass(frozen=True)
class NodalComponent:
    id: str
    members: tuple[str, ...]
    uninterrupted: bool
    complete: bool
    birth: Optional[int]

    @property
    def status(self) -> str:
        return "complete" if self.complete else "incomplete"


@dataclass(frozen=True)
class ScenarioHit:
    kind: str  # A | B | C
    level: int
    curve: str
    point: str
    witness: tuple


@dataclass
class PersistencyResult:
    verdict: str
    violations: list = field(default_factory=list)
    components: list = field(default_factory=list)  # (id, birth, breaking level or None)


def classify_curve(cx: Complex, curve: str) -> str:
    sides = cx.index_by_side(curve)
    if not sides:
        raise ComplexError(f"{curve} has no index")
    classes = {side: classify(v) for side, v in sides.items()}
    if "invalid" in classes.values():
        raise ComplexError(f"{curve} has an unclassifiable index")
    if len(set(classes.values())) != 1:
        raise ComplexError(f"{curve} classifies differently on its two sides")
    return next(iter(classes.values()))


def _nodal_curves(cx: Complex) -> list[str]:
    lv = cx.level()
    out = []
    for c in natsorted(lv.curves):
        if lv.curves[c].kind in ("corner", "trace") and cx.index_by_side(c):
            if classify_curve(cx, c) == "nodal":
                out.append(c)
    return out


def nodal_components(cx: Complex) -> list[NodalComponent]:
    lv = cx.level()
    curves = _nodal_curves(cx)
    parent = {c: c for c in curves}

    def find(c):
        while parent[c] != c:
            c = parent[c]
        return c

    for pr in lv.points.values():
        here = natsorted(c for c in pr.curves if c in parent)
        for a, b in zip(here, here[1:]):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[rb] = ra
    groups: dict[str, list[str]] = {}
    for c in curves:
        groups.setdefault(find(c), []).append(c)
    ordered = sorted((natsorted(g) for g in groups.values()), key=lambda g: natkey(g[0]))
    out = []
    for n, members in enumerate(ordered, start=1):
        pts = {p for m in members for p in cx.points_on(cx.N, m)}
        uninterrupted = True
        complete = True
        for p in pts:
            if locus_at(cx, cx.N, p).dimensional_type == 3:
                if sum(1 for m in members if m in lv.points[p].curves) != 2:
                    uninterrupted = False
            for e in lv.points[p].components:
                rec = lv.components[e]
                if rec.compact and not rec.invariant:
                    complete = False
        compact = [m for m in members if lv.curves[m].compact]
        birth = min(cx.born[m] for m in compact) if compact else None
        out.append(NodalComponent(f"N{n}", tuple(members), uninterrupted, complete, birth))
    return out


def birth_date(cx: Complex, comp: NodalComponent) -> Optional[int]:
    return comp.birth


def projection(cx: Complex, comp: NodalComponent, k: int) -> tuple[frozenset, frozenset]:
    """Curves of N_k and the points of N_k in the compact part."""
    curves, points = set(), set()
    for m in comp.members:
        kind, ent = image_at(cx, cx.N, k, m)
        if kind == "curve":
            curves.add(ent)
            points.update(p for p in cx.points_on(k, ent) if cx.in_compact_part(k, p))
        else:
            points.add(ent)
    return frozenset(curves), frozenset(points)


def birth_violations(cx: Complex, comp: NodalComponent) -> list[Violation]:
    out = []
    b = comp.birth
    if b is None:
        if comp.complete:
            out.append(Violation("birth", comp.id, "complete nodal component without compact members"))
        return out
    for k in range(b):
        curves, points = projection(cx, comp, k)
        if len(points) != 1:
            out.append(Violation("birth", f"{comp.id}@{k}", f"projection meets the compact part in {len(points)} points"))
    if comp.complete:
        st = cx.step(b)
        if st.kind != "point":
            out.append(Violation("birth-step", comp.id, f"birth step {b} is centered at a curve"))
        elif st.dicritical:
            out.append(Violation("birth-step", comp.id, f"birth step {b} is dicritical"))
    return out


def _designated(cx: Complex) -> list[NodalComponent]:
    return [c for c in nodal_components(cx) if c.uninterrupted and c.complete]


def audit_nodal_transitions(cx: Complex) -> list[Violation]:
    out: list[Violation] = []
    seps = _separatrices(cx)
    comps = nodal_components(cx)
    lv = cx.level()
    compact_inv = natsorted(c for c, r in lv.components.items() if r.compact and r.invariant)

    for nc in comps:
        if not nc.uninterrupted:
            continue
        members = set(nc.members)
        for sep in seps:
            for e in compact_inv:
                b = [m for m in sep.members if lv.curves[m].housing == (e,) and lv.curves[m].compact]
                inside = [m in members for m in b]
                if any(inside) and not all(inside):
                    out.append(Violation("nodal-membership", f"{nc.id}/{sep.id}/{e}",
                                         "membership in the nodal component is not all-or-nothing"))

    for nc in comps:
        if not (nc.uninterrupted and nc.complete):
            continue
        out.extend(birth_violations(cx, nc))
        for k in range(cx.N + 1):
            ncurves, _ = projection(cx, nc, k)
            lk = cx.level(k)
            for p in natsorted(lk.points):
                cs = natsorted(c for c in lk.points[p].components if lk.components[c].compact)
                if len(cs) != 3:
                    continue
                for a, b, c in ((cs[0], cs[1], cs[2]), (cs[0], cs[2], cs[1]), (cs[1], cs[2], cs[0])):
                    g_c = cx.corner_between(k, a, b)
                    if g_c is None or g_c not in ncurves:
                        continue
                    if not all(lk.components[x].invariant for x in cs):
                        out.append(Violation("nodal-alternation", f"{nc.id}:{p}@{k}", "nodal corner at a point with a dicritical component"))
                        continue
                    g_b = cx.corner_between(k, a, c)
                    g_a = cx.corner_between(k, b, c)
                    if (g_b in ncurves) == (g_a in ncurves):
                        out.append(Violation("nodal-alternation", f"{nc.id}:{p}@{k}", f"alternation fails around {g_c}"))
            for sep in seps:
                ccurves = curves_at(cx, sep, k)
                for p in natsorted(points_of(cx, sep, k)):
                    if not is_complete_at(cx, sep, k, p):
                        continue
                    pcurves = lk.points[p].curves
                    pcomps = [c for c in natsorted(lk.points[p].components) if lk.components[c].compact]
                    for i in pcomps:
                        if not lk.components[i].invariant:
                            continue
                        bi = [g for g in pcurves if g in ccurves and lk.curves[g].housing == (i,)]
                        if not any(g in ncurves for g in bi):
                            continue
                        for j in pcomps:
                            if j == i:
                                continue
                            if not lk.components[j].invariant:
                                out.append(Violation("nodal-transition", f"{nc.id}:{sep.id}:{p}@{k}", f"{j} is dicritical"))
                                continue
                            gamma = cx.corner_between(k, i, j)
                            bj = [g for g in pcurves if g in ccurves and lk.curves[g].housing == (j,)]
                            alt_a = gamma in ncurves and all(cx.nodal_class(g) == "real_saddle" for g in bj)
                            alt_b = cx.nodal_class(gamma) == "real_saddle" and all(g in ncurves for g in bj)
                            if alt_a == alt_b:
                                out.append(Violation("nodal-transition", f"{nc.id}:{sep.id}:{p}@{k}",
                                                     f"transition across {gamma} is not exactly one alternative"))

    for k in range(cx.N + 1):
        lk = cx.level(k)
        for p in sorted({p for p, _ in incomplete_points(cx, k)}, key=natkey):
            for i in natsorted(lk.points[p].components):
                rec = lk.components[i]
                if not (rec.compact and rec.invariant):
                    continue
                around = [g for g in lk.points[p].curves
                          if lk.curves[g].singular and i in lk.curves[g].housing and lk.curves[g].compact]
                if not any(cx.nodal_class(g) not in ("real_saddle", "none") for g in around):
                    out.append(Violation("incomplete-point-saddles", f"{p}@{k}", f"only real saddles of {i} pass through an incomplete point"))
    return out


def detect_scenarios(cx: Complex, k: int, comp: Optional[NodalComponent]) -> list[ScenarioHit]:
    if comp is None:
        raise ComplexError("no designated nodal component")
    lk = cx.level(k)
    ncurves, _ = projection(cx, comp, k)
    inc = incomplete_points(cx, k)
    inc_pts = {p for p, _ in inc}
    hits = []
    for g in natsorted(ncurves):
        rec = lk.curves[g]
        if not rec.compact:
            continue
        pts = [q for q in cx.points_on(k, g) if q in inc_pts]
        if rec.kind == "trace":
            sep = separatrix_of(cx, g)
            for q in pts:
                if sep is not None and (q, sep.id) in inc:
                    hits.append(ScenarioHit("A", k, g, q, (sep.id,)))
        if rec.kind == "corner" and all(lk.components[h].compact and lk.components[h].invariant for h in rec.housing):
            for q in pts:
                hits.append(ScenarioHit("B", k, g, q, tuple(rec.housing)))
        for i in rec.housing:
            if not (lk.components[i].compact and lk.components[i].invariant):
                continue
            for q in pts:
                thetas = natsorted(t for t in lk.points[q].curves
                                   if lk.curves[t].singular and i in lk.curves[t].housing)
                if all(t in ncurves or cx.nodal_class(t) == "real_saddle" for t in thetas):
                    hits.append(ScenarioHit("C", k, g, q, (i,) + tuple(thetas)))
    return hits


def persistency_audit(cx: Complex) -> PersistencyResult:
    res = PersistencyResult("CONSISTENT")
    designated = _designated(cx)
    for nc in designated:
        breaking = None
        if nc.birth is not None:
            hits = {k: detect_scenarios(cx, k, nc) for k in range(nc.birth, cx.N + 1)}
            if not hits[nc.birth]:
                breaking = nc.birth
            for k in range(nc.birth, cx.N):
                if hits[k] and not hits[k + 1]:
                    res.violations.append(Violation("persistency", f"{nc.id}@{k}",
                                                    f"scenario hits at level {k} but none at level {k + 1}"))
                    if breaking is None:
                        breaking = k
        res.components.append((nc.id, nc.birth, breaking))
    if cx.flags.get("all_separatrices_incomplete") and designated:
        res.verdict = "CONTRADICTORY"
    return res
