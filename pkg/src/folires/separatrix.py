"""Partial separatrices and completeness at every level."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from .complex import Complex, ComplexError, image_at, natkey, natsorted, preimage_components
from .index import Violation
from .scalar import ZERO, Scalar


class SeparatrixIndexError(ComplexError):
    pass


@dataclass(frozen=True)
class PartialSeparatrix:
    id: str
    members: tuple[str, ...]
    complete: bool
    compact_part: tuple  # ("point", id) or ("curves", (ids...))
    touched: frozenset  # components met by the members at the final level

    @property
    def status(self) -> str:
        return "complete" if self.complete else "incomplete"


def _connected(cx: Complex, curves: list[str]) -> list[list[str]]:
    lv = cx.level()
    parent = {c: c for c in curves}

    def find(c):
        while parent[c] != c:
            parent[c] = parent[parent[c]]
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
    out = [natsorted(g) for g in groups.values()]
    out.sort(key=lambda g: natkey(g[0]))
    return out


def partial_separatrices(cx: Complex) -> list[PartialSeparatrix]:
    return list(_separatrices(cx))


_SEP_CACHE: dict[int, tuple[Complex, tuple]] = {}


def _separatrices(cx: Complex) -> tuple[PartialSeparatrix, ...]:
    hit = _SEP_CACHE.get(id(cx))
    if hit is not None and hit[0] is cx:
        return hit[1]
    lv = cx.level()
    traces = natsorted(c for c, r in lv.curves.items() if r.kind == "trace")
    result = []
    for n, group in enumerate(_connected(cx, traces), start=1):
        touched = set()
        for c in group:
            for p in cx.points_on(cx.N, c):
                touched.update(lv.points[p].components)
        complete = not any(lv.components[e].compact and not lv.components[e].invariant for e in touched)
        compact = [c for c in group if lv.curves[c].compact]
        if compact:
            part = ("curves", tuple(compact))
        else:
            pts = sorted({p for c in group for p in cx.points_on(cx.N, c) if cx.in_compact_part(cx.N, p)}, key=natkey)
            part = ("point", pts[0]) if len(pts) == 1 else ("points", tuple(pts))
        result.append(PartialSeparatrix(f"C{n}", tuple(group), complete, part, frozenset(touched)))
    out = tuple(result)
    if len(_SEP_CACHE) > 32:
        _SEP_CACHE.clear()
    _SEP_CACHE[id(cx)] = (cx, out)
    return out


def separatrix_of(cx: Complex, curve: str) -> Optional[PartialSeparatrix]:
    for sep in _separatrices(cx):
        if curve in sep.members:
            return sep
    return None


def curves_at(cx: Complex, sep: PartialSeparatrix, k: int) -> frozenset:
    """Curves of the projection C_k."""
    out = set()
    for m in sep.members:
        kind, ent = image_at(cx, cx.N, k, m)
        if kind == "curve":
            out.add(ent)
    return frozenset(out)


def points_of(cx: Complex, sep: PartialSeparatrix, k: int) -> frozenset:
    """Tracked points of level k lying on the projection C_k."""
    out = set()
    for m in sep.members:
        kind, ent = image_at(cx, cx.N, k, m)
        if kind == "point":
            out.add(ent)
        else:
            out.update(cx.points_on(k, ent))
    return frozenset(p for p in out if cx.in_compact_part(k, p))


def is_complete_at(cx: Complex, sep: PartialSeparatrix, k: int, p: str) -> bool:
    if p not in points_of(cx, sep, k):
        raise ComplexError(f"{p} is not on the projection of {sep.id} at level {k}")
    for e in preimage_components(cx, k, p):
        if not cx.component(e).invariant and e in sep.touched:
            return False
    return True


def incomplete_points(cx: Complex, k: int) -> set[tuple[str, str]]:
    out = set()
    for sep in _separatrices(cx):
        for p in points_of(cx, sep, k):
            if not is_complete_at(cx, sep, k, p):
                out.add((p, sep.id))
    return out


def separatrix_index(cx: Complex, sep: PartialSeparatrix, comp: str) -> Scalar:
    rec = cx.component(comp)
    if not (rec.compact and rec.invariant):
        raise ComplexError(f"{comp} is not a compact invariant component")
    lv = cx.level()
    values = {}
    for m in sep.members:
        crec = lv.curves[m]
        if crec.housing == (comp,) and crec.compact:
            values[m] = cx.index(m, comp)
    if not values:
        return ZERO
    distinct = set(values.values())
    if len(distinct) != 1 or None in distinct:
        detail = ", ".join(f"{m}={v.render() if v else None}" for m, v in sorted(values.items()))
        raise SeparatrixIndexError(f"{sep.id} has unequal indices in {comp}: {detail}")
    return distinct.pop()


def audit_separatrix_indices(cx: Complex) -> list[Violation]:
    out = []
    comps = [c for c, r in cx.level().components.items() if r.compact and r.invariant]
    for sep in _separatrices(cx):
        for comp in natsorted(comps):
            try:
                separatrix_index(cx, sep, comp)
            except SeparatrixIndexError as exc:
                out.append(Violation("separatrix-index", f"{sep.id}/{comp}", str(exc)))
    return out


def audit_completeness(cx: Complex) -> list[Violation]:
    out: list[Violation] = []
    seps = _separatrices(cx)

    @lru_cache(maxsize=None)
    def pts(n: int, k: int) -> frozenset:
        return points_of(cx, seps[n], k)

    @lru_cache(maxsize=None)
    def crv(n: int, k: int) -> frozenset:
        return curves_at(cx, seps[n], k)

    @lru_cache(maxsize=None)
    def complete(n: int, k: int, p: str) -> bool:
        return is_complete_at(cx, seps[n], k, p)

    if cx.flags.get("all_separatrices_incomplete"):
        for sep in seps:
            if sep.complete:
                out.append(Violation("flag", sep.id, "asserted incomplete but avoids every compact dicritical component"))

    for st in cx.steps:
        if st.kind == "point" and st.dicritical:
            for n, sep in enumerate(seps):
                if st.center in pts(n, st.k - 1) and complete(n, st.k - 1, st.center):
                    out.append(Violation("dicritical-at-complete-point", f"{sep.id}@{st.center}",
                                         f"dicritical blow-up at level {st.k - 1} of a point where {sep.id} is complete"))
    for k in range(cx.N + 1):
        lv = cx.level(k)
        for n, sep in enumerate(seps):
            here = pts(n, k)
            found_incomplete = False
            meets_dic = False
            for p in natsorted(here):
                ok = complete(n, k, p)
                found_incomplete |= not ok
                for e in natsorted(lv.points[p].components):
                    erec = lv.components[e]
                    if not erec.compact:
                        continue
                    if not erec.invariant:
                        meets_dic = True
                    if not ok:
                        continue
                    if erec.invariant:
                        if not any(lv.curves[g].compact and lv.curves[g].housing == (e,) and g in lv.points[p].curves
                                   for g in crv(n, k)):
                            out.append(Violation("complete-point-without-trace", f"{sep.id}@{p}@{k}",
                                                 f"complete point without a compact trace of {sep.id} in {e}"))
                    elif e not in sep.touched:
                        out.append(Violation("complete-point-off-dicritical", f"{sep.id}@{p}@{k}",
                                             f"complete point on dicritical {e} which {sep.id} never meets"))
            if not sep.complete and not (found_incomplete or meets_dic):
                out.append(Violation("incomplete-witness", f"{sep.id}@{k}",
                                     "no incomplete point and no compact dicritical component on the projection"))
            if k == cx.N:
                continue
            nxt = pts(n, k + 1)
            st = cx.step(k + 1)
            for p in natsorted(here):
                above = [q for q in nxt if image_at(cx, k + 1, k, q) == ("point", p)]
                up_ok = all(complete(n, k + 1, q) for q in above)
                if complete(n, k, p):
                    if not up_ok:
                        out.append(Violation("monotonicity", f"{sep.id}@{p}@{k}",
                                             "complete point with an incomplete point above it"))
                else:
                    touched = (st.kind == "point" and st.center == p) or (st.kind == "curve" and st.base_point == p)
                    if (not touched or st.kind == "curve" or not st.dicritical) and up_ok:
                        out.append(Violation("monotonicity", f"{sep.id}@{p}@{k}",
                                             "incomplete point whose points above are all complete"))
    return out
