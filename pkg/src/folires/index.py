"""Camacho-Sad index bookkeeping and the audits of the index relations.

Intersection multiplicities at intermediate levels are never stored: they
are aggregated from the final level, where all crossings are transversal,
with Noether's formula

    (g, G)_p = m_p(g) m_p(G) + sum over points q over p of (g', G')_q

computed inside the surface that contains both curves.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Optional

from .complex import Complex, ComplexError, locus_at, natkey, natsorted
from .scalar import ONE, ZERO, Scalar, classify


class IndexError_(ComplexError):
    pass


@dataclass(frozen=True)
class Violation:
    audit: str
    entity: str
    message: str

    def __str__(self):
        return f"{self.audit}: {self.entity}: {self.message}"


@dataclass(frozen=True)
class WeightedIndexSum:
    value: Scalar
    terms: tuple  # (curve, anchor, multiplicity, index)


# ---------------------------------------------------------------- assignment

def _sides(cx: Complex, curve: str) -> list[str]:
    rec = cx.curve(curve)
    return [h for h in rec.housing if cx.component(h).invariant]


def assign_indices(cx: Complex, assignments: Mapping[tuple[str, str], Scalar]) -> Complex:
    """Store indices; corner reciprocity is completed automatically."""
    out = dict(cx.indices)
    explicit = dict(assignments)
    final = cx.level().curves
    for (curve, side), value in sorted(explicit.items(), key=lambda kv: (natkey(kv[0][0]), natkey(kv[0][1]))):
        rec = cx.curve(curve)
        if rec.kind not in ("corner", "trace"):
            raise IndexError_(f"{curve} is not a singular curve of an invariant component")
        if side not in _sides(cx, curve):
            raise IndexError_(f"{side} is not an invariant side of {curve}")
        value = Scalar.coerce(value)
        if not value:
            raise IndexError_(f"zero index for {curve} side {side}")
        if curve in final and classify(value) == "invalid":
            raise IndexError_(f"positive rational index {value.render()} for {curve} side {side}")
        out[(curve, side)] = value
        if rec.kind == "corner":
            (other,) = [h for h in rec.housing if h != side]
            recip = ONE / value
            given = explicit.get((curve, other))
            if given is not None and Scalar.coerce(given) * value != ONE:
                raise IndexError_(f"reciprocity conflict on {curve}")
            out[(curve, other)] = recip
    return replace(cx, indices=out)


def set_index_raw(cx: Complex, curve: str, side: str, value: Scalar) -> Complex:
    """Overwrite a single stored index with no consistency checks (fixtures, mutation)."""
    out = dict(cx.indices)
    out[(curve, side)] = Scalar.coerce(value)
    return replace(cx, indices=out)


# ------------------------------------------------------------ aggregation

class _Aggregator:
    def __init__(self, cx: Complex):
        self.cx = cx
        self.N = cx.N
        self._memo: dict = {}
        self._children: dict = {}

    def affected(self, k: int, p: str):
        if k >= self.N:
            return None
        st = self.cx.step(k + 1)
        if st.kind == "point" and st.center == p:
            return st
        if st.kind == "curve" and st.base_point == p:
            return st
        return None

    def children(self, k: int, p: str) -> list[str]:
        key = (k, p)
        if key not in self._children:
            lv = self.cx.level(k + 1)
            self._children[key] = natsorted(
                q for q, r in lv.points.items() if r.birth_level == k + 1 and self.cx.parent.get(q) == ("point", p)
            )
        return self._children[key]

    def ancestor(self, point: str, k: int) -> str:
        cur = point
        while self.cx.born[cur] > k:
            cur = self.cx.parent[cur][1]
        return cur

    def successor(self, curve: str, st, surface: str) -> Optional[str]:
        if st.kind == "curve" and st.center == curve:
            if surface in self.cx.curve(curve).housing:
                return f"X({surface[1:]},{st.k})"
            return None
        return curve

    def exceptional(self, st, surface: str) -> Optional[str]:
        if st.kind == "point":
            return f"L({st.k},{surface[1:]})"
        if surface in self.cx.curve(st.center).housing:
            return None
        return f"X({surface[1:]},{st.k})"

    def branches(self, k: int, p: str, curve: str, surface: str) -> tuple[str, ...]:
        key = ("b", k, p, curve, surface)
        if key in self._memo:
            return self._memo[key]
        lv = self.cx.level(k)
        if curve not in lv.points[p].curves:
            res: tuple[str, ...] = ()
        elif k == self.N:
            res = (p,)
        else:
            st = self.affected(k, p)
            if st is None:
                res = self.branches(k + 1, p, curve, surface)
            else:
                nxt = self.successor(curve, st, surface)
                res = ()
                if nxt is not None:
                    for q in self.children(k, p):
                        res += self.branches(k + 1, q, nxt, surface)
        self._memo[key] = res
        return res

    def mult(self, k, p, c1, a1, c2, a2, surface) -> int:
        key = ("m", k, p, c1, a1, c2, a2, surface)
        if key in self._memo:
            return self._memo[key]
        if k == self.N:
            res = 1 if (a1 == p and a2 == p) else 0
        else:
            st = self.affected(k, p)
            if st is None:
                res = self.mult(k + 1, p, c1, a1, c2, a2, surface)
            else:
                n1 = self.successor(c1, st, surface)
                n2 = self.successor(c2, st, surface)
                q1, q2 = self.ancestor(a1, k + 1), self.ancestor(a2, k + 1)
                res = 0
                if q1 == q2:
                    res += self.mult(k + 1, q1, n1, a1, n2, a2, surface)
                e = self.exceptional(st, surface)
                if e is not None:
                    res += self.branch_mult(k + 1, q1, n1, a1, e, surface) * self.branch_mult(
                        k + 1, q2, n2, a2, e, surface
                    )
        self._memo[key] = res
        return res

    def branch_mult(self, k, q, c, a, e, surface) -> int:
        """(branch, e)_q summed over the branches of the curve e at q."""
        return sum(self.mult(k, q, c, a, e, ae, surface) for ae in self.branches(k, q, e, surface))

    def curve_mult(self, k, p, c1, c2, surface) -> int:
        total = 0
        for a1 in self.branches(k, p, c1, surface):
            for a2 in self.branches(k, p, c2, surface):
                total += self.mult(k, p, c1, a1, c2, a2, surface)
        return total

    def restricted(self, k: int, p: str, gamma: str, i: str, j: str) -> Scalar:
        """Index of the foliation restricted to E_j along gamma = E_i ∩ E_j at p."""
        key = ("r", k, p, gamma, i, j)
        if key in self._memo:
            return self._memo[key]
        if k == self.N:
            lv = self.cx.level(k)
            res = ZERO
            for c in lv.points[p].curves:
                rec = lv.curves[c]
                if c != gamma and rec.singular and i in rec.housing:
                    res = res + self.cx.index(c, i)
        else:
            st = self.affected(k, p)
            if st is None:
                res = self.restricted(k + 1, p, gamma, i, j)
            else:
                kids = [q for q in self.children(k, p) if gamma in self.cx.level(k + 1).points[q].curves]
                if len(kids) != 1:
                    raise ComplexError(f"{gamma} does not continue through one point over {p}")
                res = self.restricted(k + 1, kids[0], gamma, i, j) + ONE
        self._memo[key] = res
        return res


_CACHE: dict[int, tuple[Complex, _Aggregator]] = {}
_LOCK = threading.Lock()


def aggregator(cx: Complex) -> _Aggregator:
    with _LOCK:
        hit = _CACHE.get(id(cx))
        if hit is not None and hit[0] is cx:
            return hit[1]
        agg = _Aggregator(cx)
        if len(_CACHE) > 32:
            _CACHE.clear()
        _CACHE[id(cx)] = (cx, agg)
        return agg


def _common_surface(cx: Complex, a: str, b: str) -> str:
    common = [h for h in cx.curve(a).housing if h in cx.curve(b).housing]
    if not common:
        raise ComplexError(f"{a} and {b} do not lie in a common component")
    return natsorted(common)[0]


def noether_multiplicity(cx: Complex, gamma: str, big_gamma: str, p: str, k: Optional[int] = None,
                         surface: Optional[str] = None) -> int:
    if k is None:
        k = cx.N
    if gamma == big_gamma:
        raise ComplexError("self-intersection is not an intersection multiplicity")
    curves = cx.level(k).points[p].curves if p in cx.level(k).points else frozenset()
    if gamma not in curves or big_gamma not in curves:
        raise ComplexError(f"{gamma} and {big_gamma} do not meet at {p}")
    if surface is None:
        surface = _common_surface(cx, gamma, big_gamma)
    return aggregator(cx).curve_mult(k, p, gamma, big_gamma, surface)


def weighted_index_sum(cx: Complex, k: int, p: str, i: str, big_gamma: str,
                       restrict: Optional[Iterable[str]] = None) -> WeightedIndexSum:
    lv = cx.level(k)
    if p not in lv.points or big_gamma not in lv.points[p].curves:
        raise ComplexError(f"{big_gamma} does not pass through {p}")
    allowed = None if restrict is None else set(restrict)
    agg = aggregator(cx)
    total = ZERO
    terms = []
    for g in natsorted(lv.points[p].curves):
        rec = lv.curves[g]
        if g == big_gamma or not rec.singular or i not in rec.housing:
            continue
        if allowed is not None and g not in allowed:
            continue
        ind = cx.index(g, i)
        if ind is None:
            raise ComplexError(f"missing index for {g} side {i}")
        for a in agg.branches(k, p, g, i):
            m = sum(agg.mult(k, p, g, a, big_gamma, b, i) for b in agg.branches(k, p, big_gamma, i))
            terms.append((g, a, m, ind))
            total = total + ind * m
    return WeightedIndexSum(total, tuple(terms))


def restricted_index(cx: Complex, k: int, p: str, big_gamma: str) -> Scalar:
    """Index at p of the restriction to the dicritical side of big_gamma."""
    rec = cx.curve(big_gamma)
    comps = [cx.component(h) for h in rec.housing]
    dic = [c.id for c in comps if not c.invariant]
    inv = [c.id for c in comps if c.invariant]
    if len(dic) != 1 or len(inv) != 1:
        raise ComplexError(f"{big_gamma} is not an invariant/dicritical intersection")
    return aggregator(cx).restricted(k, p, big_gamma, inv[0], dic[0])


# ------------------------------------------------------------------ audits

def check_corner_reciprocity(cx: Complex) -> list[Violation]:
    out = []
    for cid in natsorted(cx.all_curve_ids()):
        rec = cx.curve(cid)
        if rec.kind != "corner":
            continue
        a, b = rec.housing
        x, y = cx.index(cid, a), cx.index(cid, b)
        if x is None or y is None:
            continue
        if x * y != ONE:
            out.append(Violation("reciprocity", cid, f"side product {(x * y).render()} != 1"))
    return out


def _triples(cx: Complex, k: int):
    lv = cx.level(k)
    for p in natsorted(lv.points):
        comps = natsorted(lv.points[p].components)
        good = [c for c in comps if lv.components[c].compact and lv.components[c].invariant]
        if len(good) == 3:
            yield p, good


def check_triple_relations(cx: Complex) -> list[Violation]:
    out = []
    for k in range(cx.N + 1):
        for p, (i, j, l) in _triples(cx, k):
            g_l = cx.corner_between(k, i, j)
            g_j = cx.corner_between(k, i, l)
            g_i = cx.corner_between(k, j, l)
            vals = (cx.index(g_l, i), cx.index(g_j, i), cx.index(g_i, j))
            if None in (g_l, g_j, g_i) or None in vals:
                out.append(Violation("triple", f"{p}@{k}", "missing corner or index"))
                continue
            alpha, beta, rho = vals
            if beta != -(alpha * rho):
                out.append(Violation("triple", f"{p}@{k}",
                                     f"beta {beta.render()} != -alpha*rho {(-(alpha * rho)).render()}"))
    lv = cx.level()
    for p in natsorted(lv.points):
        loc = locus_at(cx, cx.N, p)
        if loc.dimensional_type == 3 and loc.case is None:
            classes = ",".join(cx.nodal_class(c) for c in loc.singular_curves)
            out.append(Violation("five-case", p, f"pattern {classes} is not one of the five cases"))
    return out


def check_dicritical_restriction(cx: Complex) -> list[Violation]:
    out = []
    agg = aggregator(cx)
    for k in range(1, cx.N + 1):
        lv = cx.level(k)
        for cid in natsorted(lv.curves):
            rec = lv.curves[cid]
            if rec.kind != "non_singular" or len(rec.housing) != 2:
                continue
            comps = [lv.components[h] for h in rec.housing]
            dic = [c for c in comps if not c.invariant and c.compact]
            inv = [c for c in comps if c.invariant]
            if len(dic) != 1 or len(inv) != 1:
                continue
            i, j = inv[0].id, dic[0].id
            for p in cx.points_on(k, cid):
                lhs = agg.restricted(k, p, cid, i, j)
                rhs = weighted_index_sum(cx, k, p, i, cid).value
                if lhs != rhs:
                    out.append(Violation("dicritical-restriction", f"{cid}@{p}@{k}",
                                         f"restricted {lhs.render()} != weighted sum {rhs.render()}"))
    return out


def _line_sum(cx: Complex, k: int, line: str, inv: str, dic: str) -> Scalar:
    agg = aggregator(cx)
    total = ZERO
    for q in cx.points_on(k, line):
        total = total + agg.restricted(k, q, line, inv, dic)
    return total


def check_line_sums(cx: Complex) -> list[Violation]:
    out = []
    agg = aggregator(cx)
    for st in cx.steps:
        k = st.k
        lv = cx.level(k)
        prev = cx.level(k - 1)
        new = st.component
        if st.kind == "point":
            through = natsorted(prev.points[st.center].components)
            if st.dicritical:
                for i in through:
                    if lv.components[i].invariant:
                        line = f"L({k},{i[1:]})"
                        s = _line_sum(cx, k, line, i, new)
                        if s != ONE:
                            out.append(Violation("line-sum", f"{line}@{k}", f"dicritical plane sum {s.render()} != 1"))
                continue
            for j in through:
                if not lv.components[j].invariant:
                    line = f"L({k},{j[1:]})"
                    s = _line_sum(cx, k, line, new, j)
                    if s != -ONE:
                        out.append(Violation("line-sum", f"{line}@{k}", f"section sum {s.render()} != -1"))
            total = ZERO
            for cid in natsorted(lv.curves):
                rec = lv.curves[cid]
                if not rec.singular or new not in rec.housing:
                    continue
                if rec.kind == "trace":
                    for i in through:
                        line = f"L({k},{i[1:]})"
                        count = sum(agg.curve_mult(k, q, cid, line, new) for q in cx.points_on(k, cid)
                                    if line in lv.points[q].curves)
                        if count != rec.degree:
                            out.append(Violation("bezout", f"{cid}@{k}",
                                                 f"meets {line} with total multiplicity {count}, degree {rec.degree}"))
                ind = cx.index(cid, new)
                if ind is None:
                    out.append(Violation("plane-sum", f"{cid}@{k}", "missing index"))
                    continue
                total = total + ind * rec.degree
            if total != -ONE:
                out.append(Violation("plane-sum", f"{new}@{k}", f"degree-weighted sum {total.render()} != -1"))
        else:
            q0 = st.base_point
            trans = [c for c in prev.points[q0].components if c not in cx.curve(st.center).housing]
            if not trans:
                continue
            c = trans[0]
            fiber = f"X({c[1:]},{k})"
            if not lv.components[c].invariant:
                s = _line_sum(cx, k, fiber, new, c)
                if s != -ONE:
                    out.append(Violation("line-sum", f"{fiber}@{k}", f"fiber sum {s.render()} != -1"))
            total = ZERO
            for cid in natsorted(lv.curves):
                rec = lv.curves[cid]
                if cid == fiber or not rec.singular or new not in rec.housing:
                    continue
                ind = cx.index(cid, new)
                if ind is None:
                    out.append(Violation("fiber-sum", f"{cid}@{k}", "missing index"))
                    continue
                count = sum(agg.curve_mult(k, q, cid, fiber, new) for q in cx.points_on(k, cid)
                            if fiber in lv.points[q].curves)
                if count < 1:
                    out.append(Violation("bezout", f"{cid}@{k}", f"section does not meet {fiber}"))
                total = total + ind * count
            if total != -ONE:
                out.append(Violation("fiber-sum", f"{new}@{k}", f"section sum {total.render()} != -1"))
    return out


def check_trace_transition(cx: Complex) -> list[Violation]:
    from .separatrix import curves_at, is_complete_at, partial_separatrices, points_of

    out = []
    seps = partial_separatrices(cx)
    for k in range(cx.N + 1):
        lv = cx.level(k)
        projections = [(c, curves_at(cx, c, k), points_of(cx, c, k)) for c in seps]
        for cid in natsorted(lv.curves):
            rec = lv.curves[cid]
            if rec.kind != "corner":
                continue
            i, j = rec.housing
            if not (lv.components[i].compact and lv.components[j].compact):
                continue
            alpha = cx.index(cid, i)
            if alpha is None:
                continue
            for p in cx.points_on(k, cid):
                wi = weighted_index_sum(cx, k, p, i, cid).value
                wj = weighted_index_sum(cx, k, p, j, cid).value
                if wi != -(alpha * wj):
                    out.append(Violation("corner-transition", f"{cid}@{p}@{k}",
                                         f"{wi.render()} != -alpha * {wj.render()}"))
                for sep, ccurves, cpoints in projections:
                    if p not in cpoints or not is_complete_at(cx, sep, k, p):
                        continue
                    wi = weighted_index_sum(cx, k, p, i, cid, restrict=ccurves).value
                    wj = weighted_index_sum(cx, k, p, j, cid, restrict=ccurves).value
                    if wi != -(alpha * wj):
                        out.append(Violation("trace-transition", f"{sep.id}:{cid}@{p}@{k}",
                                             f"{wi.render()} != -alpha * {wj.render()}"))
    return out


def run_index_audits(cx: Complex) -> dict[str, list[Violation]]:
    return {
        "reciprocity": check_corner_reciprocity(cx),
        "triple": check_triple_relations(cx),
        "dicritical_restriction": check_dicritical_restriction(cx),
        "line_sums": check_line_sums(cx),
        "trace_transition": check_trace_transition(cx),
    }


# -------------------------------------------------------- five-case table

_REPS = {
    "nodal": [Scalar(0, 1), Scalar(1, 1), Scalar(0, 3, 0, 0), Scalar(2, -1)],
    "real_saddle": [Scalar(-1), Scalar(0, -1), Scalar(-3, -1), Scalar(-1, 0, 0, 0) / 2],
    "complex_saddle": [Scalar(0, 0, 1), Scalar(0, 0, 0, 1), Scalar(1, 0, 1), Scalar(0, 0, -1),
                       Scalar(0, 0, 0, -1), Scalar(-1, 0, 1), Scalar(0, 1, 0, 1)],
}


def triple_patterns() -> set[tuple[str, str, str]]:
    """Unordered class patterns of (alpha, rho, beta = -alpha*rho) over representatives."""
    found = set()
    for ca, ra in _REPS.items():
        for cr, rr in _REPS.items():
            for a in ra:
                for r in rr:
                    cb = classify(-(a * r))
                    if cb == "invalid":
                        continue
                    found.add(tuple(sorted((ca, cr, cb))))
    return found
