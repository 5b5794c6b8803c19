"""Staged divisor complex: blow-up sequences and per-level incidence tables.

Every level is a snapshot of components, curves and points.  Levels are
never mutated once a later step exists; each construction helper returns a
new :class:`Complex` that shares the untouched levels with its input.

Naming is deterministic:

* components ``E<k>`` after the step that created them,
* ``L(k,i)`` for the line ``E_k ∩ E_i`` created by a point blow-up,
* ``X(i,k)`` for the curves ``E_i ∩ E_k`` created by a curve blow-up,
* ``P(...)`` for points, listing the sorted ids of the incident components
  and of the incident curves that are not intersections of two components.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from itertools import combinations
from typing import Iterable, Mapping, Optional

from .scalar import Scalar, classify

ORIGIN = "O"

_NAT_RE = re.compile(r"(\d+)")


def natkey(s: str):
    return tuple(int(t) if t.isdigit() else t for t in _NAT_RE.split(s))


def natsorted(items: Iterable[str]) -> list[str]:
    return sorted(items, key=natkey)


class ComplexError(ValueError):
    pass


@dataclass(frozen=True)
class ComponentRec:
    id: str
    birth_level: int
    compact: bool
    nature: str  # "invariant" | "dicritical"

    @property
    def invariant(self) -> bool:
        return self.nature == "invariant"


@dataclass(frozen=True)
class CurveRec:
    id: str
    birth_level: int
    housing: tuple[str, ...]
    kind: str  # corner | trace | non_singular | free
    compact: bool
    degree: int = 1

    @property
    def singular(self) -> bool:
        return self.kind != "non_singular"


@dataclass(frozen=True)
class PointRec:
    id: str
    birth_level: int
    components: frozenset
    curves: frozenset


@dataclass(frozen=True)
class BlowUpStep:
    k: int
    kind: str  # "point" | "curve"
    center: str
    dicritical: bool
    component: str
    # for curve steps: the point where the center meets the compact part
    base_point: Optional[str] = None


@dataclass(frozen=True)
class Level:
    k: int
    components: Mapping[str, ComponentRec]
    curves: Mapping[str, CurveRec]
    points: Mapping[str, PointRec]
    singstar: frozenset = frozenset()
    tangents: frozenset = frozenset()  # frozenset of (frozenset({c1, c2}), point)


@dataclass(frozen=True)
class Locus:
    point: str
    components: tuple[tuple[str, str], ...]
    singular_curves: tuple[str, ...]
    dimensional_type: object  # 2 | 3 | "regular" | "non_simple"
    case: Optional[int] = None


_CASES = {
    ("nodal", "nodal", "real_saddle"): 1,
    ("complex_saddle", "complex_saddle", "nodal"): 2,
    ("real_saddle", "real_saddle", "real_saddle"): 3,
    ("complex_saddle", "complex_saddle", "real_saddle"): 4,
    ("complex_saddle", "complex_saddle", "complex_saddle"): 5,
}


def case_number(classes: Iterable[str]) -> Optional[int]:
    """Case 1-5 of the type-three classification, None for any other pattern."""
    return _CASES.get(tuple(sorted(classes)))


@dataclass(frozen=True)
class Complex:
    name: str
    levels: tuple[Level, ...]
    steps: tuple[BlowUpStep, ...] = ()
    indices: Mapping[tuple[str, str], Scalar] = field(default_factory=dict)
    parent: Mapping[str, tuple[str, str]] = field(default_factory=dict)
    born: Mapping[str, int] = field(default_factory=dict)
    flags: Mapping[str, bool] = field(default_factory=dict)

    # ------------------------------------------------------------ access
    @property
    def N(self) -> int:
        return len(self.levels) - 1

    def level(self, k: Optional[int] = None) -> Level:
        if k is None:
            k = self.N
        if not 0 <= k <= self.N:
            raise ComplexError(f"no level {k}")
        return self.levels[k]

    def step(self, k: int) -> BlowUpStep:
        """The step producing level k (1-based)."""
        return self.steps[k - 1]

    def component(self, cid: str) -> ComponentRec:
        try:
            return self.levels[-1].components[cid]
        except KeyError:
            raise ComplexError(f"unknown component {cid}") from None

    def curve(self, cid: str) -> CurveRec:
        """Curve record from the latest level where the curve exists."""
        for lv in reversed(self.levels):
            if cid in lv.curves:
                return lv.curves[cid]
        raise ComplexError(f"unknown curve {cid}")

    def all_curve_ids(self) -> set[str]:
        out: set[str] = set()
        for lv in self.levels:
            out.update(lv.curves)
        return out

    def index(self, curve: str, side: str) -> Optional[Scalar]:
        return self.indices.get((curve, side))

    def index_by_side(self, curve: str) -> dict[str, Scalar]:
        return {s: v for (c, s), v in self.indices.items() if c == curve}

    def nodal_class(self, curve: str) -> str:
        sides = self.index_by_side(curve)
        if not sides:
            return "none"
        return classify(sides[natsorted(sides)[0]])

    def points_on(self, k: int, curve: str) -> list[str]:
        lv = self.level(k)
        return natsorted(p for p, rec in lv.points.items() if curve in rec.curves)

    def points_in(self, k: int, comp: str) -> list[str]:
        lv = self.level(k)
        return natsorted(p for p, rec in lv.points.items() if comp in rec.components)

    def corner_between(self, k: int, a: str, b: str) -> Optional[str]:
        want = tuple(natsorted((a, b)))
        for cid, rec in self.level(k).curves.items():
            if rec.housing == want:
                return cid
        return None

    def in_compact_part(self, k: int, p: str) -> bool:
        rec = self.level(k).points[p]
        if p == ORIGIN:
            return True
        return any(self.component(c).compact for c in rec.components)

    def exists(self, k: int, entity: str) -> bool:
        lv = self.level(k)
        return entity in lv.points or entity in lv.curves or entity in lv.components

    def _used_names(self) -> set[str]:
        return set(self.born)


# ------------------------------------------------------------------ builders

def new_ambient(name: str) -> Complex:
    origin = PointRec(ORIGIN, 0, frozenset(), frozenset())
    lv = Level(0, {}, {}, {ORIGIN: origin})
    return Complex(name=name, levels=(lv,), born={ORIGIN: 0})


def _with_last(cx: Complex, lv: Level, **changes) -> Complex:
    return replace(cx, levels=cx.levels[:-1] + (lv,), **changes)


def set_flag(cx: Complex, flag: str, value: bool) -> Complex:
    flags = dict(cx.flags)
    flags[flag] = value
    return replace(cx, flags=flags)


def declare_germ(cx: Complex, gid: str, at: str = ORIGIN) -> Complex:
    """A free singular curve through a point of level 0."""
    if cx.N != 0:
        raise ComplexError("germs can only be declared before the first step")
    if gid in cx.born:
        raise ComplexError(f"duplicate entity {gid}")
    lv = cx.level()
    if at not in lv.points:
        raise ComplexError(f"unknown point {at}")
    curves = dict(lv.curves)
    curves[gid] = CurveRec(gid, 0, (), "free", False)
    points = dict(lv.points)
    pr = points[at]
    points[at] = replace(pr, curves=pr.curves | {gid})
    born = dict(cx.born)
    born[gid] = 0
    return _with_last(cx, replace(lv, curves=curves, points=points), born=born)


def mark_singstar(cx: Complex, level: int, entity: str) -> Complex:
    lv = cx.level(level)
    if not cx.exists(level, entity):
        raise ComplexError(f"unknown entity {entity} at level {level}")
    levels = list(cx.levels)
    levels[level] = replace(lv, singstar=lv.singstar | {entity})
    return replace(cx, levels=tuple(levels))


def declare_tangent(cx: Complex, c1: str, c2: str, at: str) -> Complex:
    lv = cx.level()
    pr = lv.points.get(at)
    if pr is None:
        raise ComplexError(f"unknown point {at}")
    if c1 == c2 or c1 not in pr.curves or c2 not in pr.curves:
        raise ComplexError(f"tangency needs two distinct curves through {at}")
    return _with_last(cx, replace(lv, tangents=lv.tangents | {(frozenset((c1, c2)), at)}))


def _fresh(cx: Complex, base: str, taken: set[str]) -> str:
    if base not in taken:
        return base
    n = 2
    while f"{base}#{n}" in taken:
        n += 1
    return f"{base}#{n}"


def point_name(ids: Iterable[str]) -> str:
    return "P(" + ",".join(natsorted(ids)) + ")"


def _tangent_groups(lv: Level, p: str, curves: Iterable[str]) -> list[list[str]]:
    curves = natsorted(curves)
    parent = {c: c for c in curves}

    def find(c):
        while parent[c] != c:
            c = parent[c]
        return c

    for pair, at in lv.tangents:
        if at != p:
            continue
        a, b = natsorted(pair)
        if a in parent and b in parent:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb, key=natkey)] = min(ra, rb, key=natkey)
    groups: dict[str, list[str]] = {}
    for c in curves:
        groups.setdefault(find(c), []).append(c)
    return [groups[r] for r in natsorted(groups)]


def _check_center(cx: Complex, center: str, kind: str, strict: bool) -> None:
    if not strict:
        return
    lv = cx.level()
    if center not in lv.singstar:
        raise ComplexError(f"center {center} is not marked non-simple at level {cx.N}")
    if cx.N == 0 and (kind != "point" or center != ORIGIN):
        raise ComplexError("first center must be the origin")
    msg = equireduction_violation(cx, cx.N, center, kind)
    if msg:
        raise ComplexError(msg)


def blow_up_point(cx: Complex, p: str, dicritical: bool, strict: bool = True) -> Complex:
    lv = cx.level()
    if p not in lv.points:
        raise ComplexError(f"unknown point {p} at level {cx.N}")
    _check_center(cx, p, "point", strict)
    k = cx.N + 1
    new = f"E{k}"
    pr = lv.points[p]
    cp = natsorted(pr.components)
    if len(cp) > 3:
        raise ComplexError(f"point {p} lies on more than three components")
    compact = p == ORIGIN or any(lv.components[c].compact for c in cp)
    nature = "dicritical" if dicritical else "invariant"
    comps = dict(lv.components)
    comps[new] = ComponentRec(new, k, compact, nature)
    curves = dict(lv.curves)
    born = dict(cx.born)
    parent = dict(cx.parent)
    taken = cx._used_names()
    born[new] = k
    parent[new] = ("point", p)

    def add_curve(rec: CurveRec):
        curves[rec.id] = rec
        born[rec.id] = k
        parent[rec.id] = ("point", p)
        taken.add(rec.id)

    lines = {}
    for c in cp:
        lid = f"L({k},{c[1:]})"
        both_inv = comps[c].invariant and not dicritical
        add_curve(CurveRec(lid, k, tuple(natsorted((c, new))), "corner" if both_inv else "non_singular", compact))
        lines[c] = lid

    points = {q: r for q, r in lv.points.items() if q != p}

    def add_point(ids, comp_set, curve_set):
        name = _fresh(cx, point_name(ids), taken)
        taken.add(name)
        points[name] = PointRec(name, k, frozenset(comp_set), frozenset(curve_set))
        born[name] = k
        parent[name] = ("point", p)

    pair_curves = set()
    for a, b in combinations(cp, 2):
        x = cx.corner_between(cx.N, a, b)
        if x is None or x not in pr.curves:
            raise ComplexError(f"components {a} and {b} meet at {p} without an intersection curve")
        pair_curves.add(x)
        add_point((a, b, new), (a, b, new), (x, lines[a], lines[b]))

    for group in _tangent_groups(lv, p, pr.curves - pair_curves):
        hs = {tuple(h for h in lv.curves[g].housing if h in pr.components) for g in group}
        if len(hs) != 1:
            raise ComplexError(f"tangent curves {group} at {p} lie in different components")
        (h,) = hs
        if len(h) > 1:
            raise ComplexError(f"curve {group[0]} lies in two components at {p}")
        add_point(tuple(h) + (new,) + tuple(group), set(h) | {new}, set(group) | {lines[c] for c in h})

    step = BlowUpStep(k, "point", p, dicritical, new)
    level = Level(k, comps, curves, points)
    return replace(cx, levels=cx.levels + (level,), steps=cx.steps + (step,), born=born, parent=parent)


def blow_up_curve(cx: Complex, y: str, strict: bool = True) -> Complex:
    lv = cx.level()
    if y not in lv.curves:
        raise ComplexError(f"unknown curve {y} at level {cx.N}")
    yrec = lv.curves[y]
    if yrec.compact:
        raise ComplexError(f"compact center curve {y}")
    _check_center(cx, y, "curve", strict)
    pts = cx.points_on(cx.N, y)
    if len(pts) != 1:
        raise ComplexError(f"center {y} must meet the compact part in exactly one point, found {len(pts)}")
    (q,) = pts
    pr = lv.points[q]
    house = [c for c in natsorted(pr.components) if c in yrec.housing]
    trans = [c for c in natsorted(pr.components) if c not in yrec.housing]
    if len(trans) > 1:
        raise ComplexError(f"normal-crossings violation: {y} meets {len(trans)} components at {q}")
    k = cx.N + 1
    new = f"E{k}"
    comps = dict(lv.components)
    comps[new] = ComponentRec(new, k, False, "invariant")
    curves = {c: r for c, r in lv.curves.items() if c != y}
    born = dict(cx.born)
    parent = dict(cx.parent)
    taken = cx._used_names()
    born[new] = k
    parent[new] = ("curve", y)
    points = {r: v for r, v in lv.points.items() if r != q}

    def add(rec: CurveRec, image):
        curves[rec.id] = rec
        born[rec.id] = k
        parent[rec.id] = image
        taken.add(rec.id)

    fiber = None
    if trans:
        c = trans[0]
        fiber = f"X({c[1:]},{k})"
        add(CurveRec(fiber, k, tuple(natsorted((c, new))), "corner" if comps[c].invariant else "non_singular", True),
            ("point", q))
    sections = {}
    for h in house:
        sid = f"X({h[1:]},{k})"
        add(CurveRec(sid, k, tuple(natsorted((h, new))), "corner" if comps[h].invariant else "non_singular", False),
            ("curve", y))
        sections[h] = sid

    def add_point(ids, comp_set, curve_set):
        name = _fresh(cx, point_name(ids), taken)
        taken.add(name)
        points[name] = PointRec(name, k, frozenset(comp_set), frozenset(curve_set))
        born[name] = k
        parent[name] = ("point", q)
        return name

    fiber_points = {}
    pair_curves = set()
    if trans:
        c = trans[0]
        for h in house:
            x = cx.corner_between(cx.N, c, h)
            if x is None or x not in pr.curves:
                raise ComplexError(f"components {c} and {h} meet at {q} without an intersection curve")
            pair_curves.add(x)
            fiber_points[h] = add_point((c, h, new), (c, h, new), (x, fiber, sections[h]))
    for a, b in combinations(house, 2):
        x = cx.corner_between(cx.N, a, b)
        if x is not None:
            pair_curves.add(x)
    rest = pr.curves - pair_curves - {y}
    for group in _tangent_groups(lv, q, rest):
        hs = {tuple(h for h in lv.curves[g].housing if h in pr.components) for g in group}
        if len(hs) != 1:
            raise ComplexError(f"tangent curves {group} at {q} lie in different components")
        (h,) = hs
        if not h:
            raise ComplexError(f"free curve {group[0]} passes through the center point {q}")
        (h,) = h
        if trans and h == trans[0]:
            add_point((h, new) + tuple(group), {h, new}, set(group) | {fiber})
        elif h in fiber_points:
            name = fiber_points[h]
            points[name] = replace(points[name], curves=points[name].curves | set(group))
        else:
            raise ComplexError(f"curve {group[0]} cannot be re-attached after blowing up {y}")
    step = BlowUpStep(k, "curve", y, False, new, base_point=q)
    level = Level(k, comps, curves, points)
    return replace(cx, levels=cx.levels + (level,), steps=cx.steps + (step,), born=born, parent=parent)


_PNAME_RE = re.compile(r"^P\((.*)\)(#\d+)?$")


def declare_trace(cx: Complex, tid: str, comp: str, at: str, degree: int = 1) -> Complex:
    """Declare (or extend) a trace curve in the newest component through ``at``.

    ``at`` is an existing point, or the name of a new point ``P(Ea,Eb,tid)``
    where the trace crosses the intersection curve of ``Ea`` and ``Eb``.
    """
    lv = cx.level()
    k = cx.N
    if comp not in lv.components:
        raise ComplexError(f"unknown component {comp}")
    crec = lv.components[comp]
    if crec.birth_level != k:
        raise ComplexError(f"traces can only be declared in the newest component, not {comp}")
    if not crec.invariant:
        raise ComplexError(f"trace {tid} declared in dicritical component {comp}")
    curves = dict(lv.curves)
    born = dict(cx.born)
    if tid in curves:
        old = curves[tid]
        if old.housing != (comp,):
            raise ComplexError(f"trace {tid} already declared in another component")
        if old.degree != degree:
            raise ComplexError(f"conflicting degrees for trace {tid}")
    else:
        if tid in cx.born:
            raise ComplexError(f"duplicate entity {tid}")
        curves[tid] = CurveRec(tid, k, (comp,), "trace", crec.compact, degree)
        born[tid] = k
    parent = dict(cx.parent)
    parent.setdefault(tid, cx.parent[comp])
    points = dict(lv.points)
    if at in points:
        pr = points[at]
        if comp not in pr.components:
            raise ComplexError(f"point {at} is not on {comp}")
        points[at] = replace(pr, curves=pr.curves | {tid})
    else:
        m = _PNAME_RE.match(at)
        ids = m.group(1).split(",") if m else []
        cps = [i for i in ids if i in lv.components]
        others = [i for i in ids if i not in lv.components]
        if not m or len(cps) != 2 or comp not in cps or others != [tid]:
            raise ComplexError(f"unknown point {at}")
        x = cx.corner_between(k, *cps)
        if x is None or cx.born[x] != k:
            raise ComplexError(f"components {cps[0]} and {cps[1]} do not meet along a new curve")
        if at in cx.born:
            raise ComplexError(f"point name {at} already used")
        points[at] = PointRec(at, k, frozenset(cps), frozenset((x, tid)))
        born[at] = k
        parent[at] = cx.parent[x]
        return _with_last(cx, replace(lv, curves=curves, points=points), born=born, parent=parent)
    return _with_last(cx, replace(lv, curves=curves, points=points), born=born, parent=parent)


# --------------------------------------------------------------- lineage

def image_at(cx: Complex, frm: int, to: int, entity: str) -> tuple[str, str]:
    """Blow-down image at level ``to`` of an entity existing at level ``frm``.

    Returns ``(kind, id)`` with kind ``point``, ``curve`` or ``component``.
    """
    if to > frm:
        raise ComplexError("image target level must not exceed the source level")
    if not cx.exists(frm, entity):
        raise ComplexError(f"{entity} does not exist at level {frm}")
    cur = entity
    while cx.born[cur] > to:
        cur = cx.parent[cur][1]
    lv = cx.level(to)
    if cur in lv.points:
        return ("point", cur)
    if cur in lv.curves:
        return ("curve", cur)
    return ("component", cur)


def preimage_components(cx: Complex, k: int, p: str) -> set[str]:
    if p not in cx.level(k).points:
        raise ComplexError(f"unknown point {p} at level {k}")
    out = set()
    for cid, rec in cx.level().components.items():
        if rec.birth_level > k and image_at(cx, cx.N, k, cid) == ("point", p):
            out.add(cid)
    return out


def equireduction_violation(cx: Complex, k: int, center: str, kind: str) -> Optional[str]:
    """Check a center at level k against earlier curve steps."""
    for st in cx.steps[:k]:
        if st.kind != "curve":
            continue
        s = st.k
        base = st.base_point
        if kind == "point":
            if image_at(cx, k, s - 1, center) == ("point", base):
                return f"point center {center} lies over the curve-center point {base} of step {s}"
        else:
            pts = cx.points_on(k, center)
            over = any(image_at(cx, k, s - 1, q) == ("point", base) for q in pts)
            if over and image_at(cx, k, s - 1, center) != ("curve", st.center):
                return f"curve center {center} lies over {base} but does not map onto {st.center}"
    return None


# ------------------------------------------------------------ local data

def locus_at(cx: Complex, k: int, p: str) -> Locus:
    lv = cx.level(k)
    if p not in lv.points:
        raise ComplexError(f"unknown point {p} at level {k}")
    pr = lv.points[p]
    comps = tuple((c, lv.components[c].nature) for c in natsorted(pr.components))
    sing = tuple(c for c in natsorted(pr.curves) if lv.curves[c].singular)
    inv = [c for c, nat in comps if nat == "invariant"]
    dic = [c for c, nat in comps if nat == "dicritical"]
    tangent = any(at == p for _, at in lv.tangents)
    dtype: object = "non_simple"
    case = None
    if tangent:
        pass
    elif not sing:
        dtype = "regular"
    elif len(sing) == 1:
        housing = set(lv.curves[sing[0]].housing)
        if set(inv) <= housing:
            dtype = 2
    elif len(sing) == 3 and not dic:
        kinds = [lv.curves[c] for c in sing]
        if len(inv) == 3 and all(r.kind == "corner" for r in kinds):
            dtype = 3
        elif len(inv) == 2:
            corners = [r for r in kinds if r.kind == "corner"]
            traces = [r for r in kinds if r.kind == "trace"]
            if len(corners) == 1 and len(traces) == 2 and {t.housing[0] for t in traces} == set(inv):
                dtype = 3
        if dtype == 3:
            classes = [cx.nodal_class(c) for c in sing]
            if "none" not in classes:
                case = case_number(classes)
    return Locus(p, comps, sing, dtype, case)


def validate_sequence(cx: Complex) -> list[str]:
    """Every violation of the validity rules, as human-readable lines."""
    out: list[str] = []
    for st in cx.steps:
        k = st.k
        prev = cx.level(k - 1)
        if k == 1 and (st.kind != "point" or st.center != ORIGIN):
            out.append("first center must be the origin")
        if st.center not in prev.singstar:
            out.append(f"step {k}: center {st.center} not in Sing* of level {k - 1}")
        if k > 1:
            msg = equireduction_violation(cx, k - 1, st.center, st.kind)
            if msg:
                out.append(f"step {k}: equireduction break: {msg}")
        comp = cx.component(st.component)
        if st.kind == "point":
            want = st.center == ORIGIN or cx.in_compact_part(k - 1, st.center)
        else:
            want = False
            if st.dicritical:
                out.append(f"step {k}: dicritical curve blow-up is not supported")
        if comp.compact != want:
            out.append(f"step {k}: compactness bookkeeping error for {comp.id}")
    last = cx.level()
    for e in natsorted(last.singstar):
        out.append(f"level {cx.N}: {e} still marked non-simple")
    if cx.N > 0:
        for p in natsorted(last.points):
            if not cx.in_compact_part(cx.N, p):
                continue
            loc = locus_at(cx, cx.N, p)
            if loc.dimensional_type == "non_simple":
                out.append(f"level {cx.N}: point {p} is not simple")
    comps = cx.level().components
    for a, b in combinations(natsorted(c for c, r in comps.items() if r.compact and r.invariant), 2):
        n = sum(1 for r in last.curves.values() if r.housing == tuple(natsorted((a, b))))
        if n > 1:
            out.append(f"components {a} and {b} meet in {n} curves")
    for cid in natsorted(last.curves):
        rec = last.curves[cid]
        if rec.kind in ("corner", "trace"):
            sides = [h for h in rec.housing if comps[h].invariant]
            for s in sides:
                v = cx.index(cid, s)
                if v is None:
                    out.append(f"missing index for {cid} side {s}")
                elif classify(v) == "invalid":
                    out.append(f"invalid final index {v.render()} for {cid} side {s}")
    return out
