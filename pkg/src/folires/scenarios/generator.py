"""Seeded construction of valid complexes.

Every invariant surface through the region being blown up carries a residue,
a linear form in a few unknowns.  Components get residues from their
centers (sum over the surfaces through the center), dicritical components
have residue zero, and the index of a surface ``a`` along ``a ∩ b`` is
``-res(b) / res(a)``.  Indices obtained this way satisfy the reciprocity,
triple, restriction and sum relations, so the generator only has to keep
the combinatorics valid and reject unlucky numeric draws.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from ..complex import (
    ORIGIN,
    Complex,
    ComplexError,
    blow_up_curve,
    blow_up_point,
    declare_germ,
    declare_trace,
    mark_singstar,
    natkey,
    natsorted,
    new_ambient,
    point_name,
    set_flag,
    validate_sequence,
)
from ..index import assign_indices
from ..scalar import Scalar, classify

ATTEMPT_CAP = 10_000
MODES = ("free", "all_incomplete", "force_nodal_chain")


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class GeneratorParams:
    seed: int = 1
    min_steps: int = 1
    max_steps: int = 12
    dicritical_prob: float = 0.3
    curve_prob: float = 0.3
    pool_bound: int = 8
    mode: str = "free"
    # reject draws without any singular curve, i.e. a lone dicritical blow-up
    nontrivial: bool = True

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode}")
        if not 1 <= self.min_steps <= self.max_steps:
            raise ValueError("bad step range")
        if self.nontrivial and self.max_steps == 1:
            raise ValueError("a single step only admits the trivial complex; pass nontrivial=False")


Form = dict  # variable -> Fraction


def _add(*forms: Form) -> Form:
    out: Form = {}
    for f in forms:
        for v, c in f.items():
            out[v] = out.get(v, 0) + c
    return {v: c for v, c in out.items() if c != 0}


def _scale(f: Form, c) -> Form:
    return {v: x * c for v, x in f.items() if x * c != 0}


class _Reject(Exception):
    pass


class _Builder:
    def __init__(self, name: str, rng: random.Random):
        self.rng = rng
        self.cx: Complex = new_ambient(name)
        self.forms: dict[str, Form] = {}
        self.curve_sheets: dict[str, frozenset] = {}
        self.point_sheets: dict[str, frozenset] = {}
        self.germ_sheets: dict[str, tuple[str, str]] = {}
        self.sep_sheets: list[str] = []
        self.frozen: set[str] = set()
        self.sections: set[str] = set()
        self.nvar = 0
        self.ntrace = 0
        self.ngerm = 0

    # ---------------------------------------------------------- helpers
    def clone(self) -> "_Builder":
        b = object.__new__(_Builder)
        b.__dict__.update(self.__dict__)
        b.forms = dict(self.forms)
        b.curve_sheets = dict(self.curve_sheets)
        b.point_sheets = dict(self.point_sheets)
        b.germ_sheets = dict(self.germ_sheets)
        b.sep_sheets = list(self.sep_sheets)
        b.frozen = set(self.frozen)
        b.sections = set(self.sections)
        return b

    def new_sep(self) -> str:
        self.nvar += 1
        s = f"S{self.nvar}"
        self.forms[s] = {f"u{self.nvar}": Fraction(1)}
        self.sep_sheets.append(s)
        return s

    def new_germ(self, a: str, b: str) -> str:
        self.ngerm += 1
        g = f"Y{self.ngerm}"
        self.germ_sheets[g] = (a, b)
        self.curve_sheets[g] = frozenset((a, b))
        self.cx = declare_germ(self.cx, g)
        return g

    def new_trace_id(self) -> str:
        self.ntrace += 1
        return f"T{self.ntrace}"

    def is_comp(self, sheet: str) -> bool:
        return sheet.startswith("E")

    def invariant(self, sheet: str) -> bool:
        return not self.is_comp(sheet) or self.cx.component(sheet).invariant

    def substitute(self, var: str, value: Form) -> None:
        for s, f in list(self.forms.items()):
            if var in f:
                c = f[var]
                rest = {v: x for v, x in f.items() if v != var}
                self.forms[s] = _add(rest, _scale(value, c))

    def forms_ok(self) -> bool:
        for s, f in self.forms.items():
            if self.invariant(s) and not f:
                return False
        return True

    def record_new_points(self, k: int) -> list[str]:
        lv = self.cx.level(k)
        fresh = []
        for p, rec in lv.points.items():
            if p in self.point_sheets:
                continue
            sheets = set(rec.components)
            for c in rec.curves:
                sheets |= self.curve_sheets[c]
            self.point_sheets[p] = frozenset(sheets)
            fresh.append(p)
        return natsorted(fresh)

    def find_point(self, k: int, sheets: frozenset) -> Optional[str]:
        for p in self.cx.points_in(k, next(s for s in sheets if self.is_comp(s))):
            if self.point_sheets.get(p) == sheets and p in self.cx.level(k).points:
                return p
        return None

    def add_trace(self, comp: str, sheet: str, others: list[str]) -> str:
        """New trace comp ∩ sheet through the points {comp, x, sheet}."""
        k = self.cx.N
        tid = self.new_trace_id()
        self.curve_sheets[tid] = frozenset((comp, sheet))
        targets = []
        for x in others:
            want = frozenset((comp, x, sheet))
            p = self.find_point(k, want)
            if p is None:
                if not self.is_comp(x):
                    raise _Reject()
                p = point_name((x, comp, tid))
            targets.append((p, want))
        targets.sort(key=lambda t: (t[0] in self.cx.level(k).points, natkey(t[0])))
        for p, want in targets:
            self.cx = declare_trace(self.cx, tid, comp, p)
            self.point_sheets[p] = want
        return tid

    # ------------------------------------------------------------ moves
    def origin(self, dicritical: bool, cones: list[int], germs: int) -> None:
        if dicritical:
            for _ in range(germs):
                a, b = self.new_sep(), self.new_sep()
                self.new_germ(a, b)
        else:
            seps = [self.new_sep() for _ in cones]
            self.degree = dict(zip(seps, cones))
            for i in range(len(seps)):
                for j in range(i + 1, len(seps)):
                    for _ in range(cones[i] * cones[j]):
                        self.new_germ(seps[i], seps[j])
        self.cx = mark_singstar(self.cx, 0, ORIGIN)
        self.cx = blow_up_point(self.cx, ORIGIN, dicritical)
        e1 = "E1"
        if dicritical:
            self.forms[e1] = {}
        else:
            self.forms[e1] = _add(*(_scale(self.forms[s], d) for s, d in self.degree.items()))
        for g in self.germ_sheets:
            self.curve_sheets[g] = frozenset(self.germ_sheets[g])
        self.record_new_points(1)
        if not dicritical:
            for s in natsorted(self.degree):
                tid = self.new_trace_id()
                self.curve_sheets[tid] = frozenset((e1, s))
                for p in natsorted(self.cx.points_in(1, e1)):
                    if s in self.point_sheets[p]:
                        self.cx = declare_trace(self.cx, tid, e1, p, degree=self.degree[s])

    def point_step(self, p: str, want_dicritical: bool) -> None:
        k = self.cx.N
        sheets = self.point_sheets[p]
        total = _add(*(self.forms[s] for s in sheets))
        dicritical = not total
        if want_dicritical and total:
            var = self.rng.choice(sorted(total, key=natkey))
            c = total[var]
            value = _scale({v: x for v, x in total.items() if v != var}, Fraction(-1) / c)
            self.substitute(var, value)
            dicritical = True
        if not self.forms_ok():
            raise _Reject()
        self.cx = mark_singstar(self.cx, k, p)
        self.cx = blow_up_point(self.cx, p, dicritical)
        new = f"E{k + 1}"
        self.forms[new] = {} if dicritical else _add(*(self.forms[s] for s in sheets))
        for c in self.cx.level(k + 1).curves:
            if c.startswith(f"L({k + 1},"):
                other = "E" + c[len(f"L({k + 1},"):-1]
                self.curve_sheets[c] = frozenset((new, other))
        self.record_new_points(k + 1)
        if not dicritical:
            for s in natsorted(x for x in sheets if not self.is_comp(x)):
                others = natsorted(x for x in sheets if x != s)
                self.add_trace(new, s, others)

    def curve_step(self, y: str) -> None:
        k = self.cx.N
        (q,) = self.cx.points_on(k, y)
        sheets = self.point_sheets[q]
        house = self.curve_sheets[y]
        (c,) = [s for s in sheets if s not in house]
        total = _add(*(self.forms[s] for s in house))
        if not total:
            raise _Reject()
        self.cx = mark_singstar(self.cx, k, y)
        self.cx = blow_up_curve(self.cx, y)
        new = f"E{k + 1}"
        self.forms[new] = total
        lv = self.cx.level(k + 1)
        for cid, rec in lv.curves.items():
            if cid not in self.curve_sheets:
                self.curve_sheets[cid] = frozenset(rec.housing)
        self.record_new_points(k + 1)
        for s in natsorted(x for x in house if not self.is_comp(x)):
            tid = self.add_trace(new, s, [c])
            self.sections.add(tid)
        self.frozen.update(p for p, r in self.cx.level().points.items() if r.birth_level == k + 1)

    # ------------------------------------------------------------ queries
    def pending(self) -> list[str]:
        out = []
        lv = self.cx.level()
        for g in self.germ_sheets:
            if g not in lv.curves:
                continue
            (p,) = self.cx.points_on(self.cx.N, g)
            if any(lv.components[c].invariant for c in lv.points[p].components):
                out.append(g)
        return natsorted(out)

    def point_candidates(self) -> list[str]:
        lv = self.cx.level()
        return natsorted(p for p in lv.points if p not in self.frozen)

    def germ_candidates(self) -> list[str]:
        lv = self.cx.level()
        return natsorted(g for g in self.germ_sheets if g in lv.curves)

    def lineage_candidates(self) -> list[str]:
        lv = self.cx.level()
        return natsorted(t for t in self.sections if t in lv.curves and len(self.cx.points_on(self.cx.N, t)) == 1)


# ------------------------------------------------------------ numerics

def _rand_rational(rng: random.Random, bound: int) -> Fraction:
    while True:
        p = rng.randint(-bound, bound)
        if p:
            return Fraction(p, rng.randint(1, bound))


def _rand_value(rng: random.Random, bound: int, real: bool) -> Scalar:
    a = _rand_rational(rng, bound) if rng.random() < 0.7 else Fraction(0)
    b = _rand_rational(rng, bound)
    if real or rng.random() < 0.4:
        return Scalar(a, b)
    c = _rand_rational(rng, bound)
    d = _rand_rational(rng, bound) if rng.random() < 0.15 else Fraction(0)
    return Scalar(a, b, c, d)


def _evaluate(form: Form, values: dict) -> Scalar:
    out = Scalar(0)
    for v, c in form.items():
        out = out + values[v] * Scalar(c)
    return out


def _indices(b: _Builder, values: dict) -> Optional[dict]:
    res = {s: _evaluate(f, values) for s, f in b.forms.items()}
    for s, v in res.items():
        if b.invariant(s) and not v:
            return None
    cx = b.cx
    final = cx.level().curves
    out = {}
    for cid in natsorted(cx.all_curve_ids()):
        rec = cx.curve(cid)
        if rec.kind not in ("corner", "trace"):
            continue
        x, y = sorted(b.curve_sheets[cid], key=natkey)
        for side, other in ((x, y), (y, x)):
            if b.is_comp(side) and cx.component(side).invariant:
                val = -res[other] / res[side]
                if not val or (cid in final and classify(val) == "invalid"):
                    return None
                out[(cid, side)] = val
    return out


def _ratio(f: Form, g: Form) -> Optional[Fraction]:
    """The constant c with f = c*g, if there is one."""
    if not g or set(f) != set(g):
        return Fraction(0) if not f and g else None
    cs = {f[v] / g[v] for v in g}
    return cs.pop() if len(cs) == 1 else None


def _doomed(b: _Builder) -> bool:
    """True when some final index is a positive rational for every draw."""
    final = b.cx.level().curves
    for cid in natsorted(final):
        rec = final[cid]
        if rec.kind not in ("corner", "trace"):
            continue
        x, y = sorted(b.curve_sheets[cid], key=natkey)
        for side, other in ((x, y), (y, x)):
            if b.is_comp(side) and b.cx.component(side).invariant:
                c = _ratio(b.forms[other], b.forms[side])
                if c is not None and c <= 0:
                    return True
    return False


def _instantiate(b: _Builder, rng: random.Random, bound: int, real: bool) -> Optional[Complex]:
    variables = sorted({v for f in b.forms.values() for v in f}, key=natkey)
    values = {v: _rand_value(rng, bound, real) for v in variables}
    idx = _indices(b, values)
    if idx is None:
        return None
    return assign_indices(b.cx, idx)


# ---------------------------------------------------------- structure

def _build_random(params: GeneratorParams, rng: random.Random, name: str) -> _Builder:
    target = rng.randint(params.min_steps, params.max_steps)
    b = _Builder(name, rng)
    dic_origin = rng.random() < (0.8 if params.mode == "all_incomplete" else params.dicritical_prob)
    if target < 2:
        dic_origin = True
    if dic_origin:
        germs = rng.randint(0 if target == 1 else 1, min(3, max(0, target - 1)))
        b.origin(True, [], germs)
    else:
        ncones = 2 if target < 4 or rng.random() < 0.6 else 3
        cones = [1] * ncones
        if ncones == 2 and target >= 4 and rng.random() < 0.2:
            cones[1] = 2
        b.origin(False, cones, 0)
        if len(b.pending()) > target - 1:
            raise _Reject()
    while b.cx.N + len(b.pending()) < target:
        for _ in range(ATTEMPT_CAP):
            trial = b.clone()
            try:
                r = rng.random()
                germs = trial.germ_candidates()
                lineage = trial.lineage_candidates()
                if r < params.curve_prob and germs:
                    trial.curve_step(rng.choice(germs))
                elif r < params.curve_prob + 0.1 and lineage:
                    trial.curve_step(rng.choice(lineage))
                else:
                    pts = trial.point_candidates()
                    if not pts:
                        raise _Reject()
                    trial.point_step(rng.choice(pts), rng.random() < params.dicritical_prob)
                if trial.cx.N + len(trial.pending()) > target:
                    raise _Reject()
            except _Reject:
                continue
            b = trial
            break
        else:
            raise GenerationError(f"no valid step found within {ATTEMPT_CAP} attempts")
        if not b.point_candidates() and not b.germ_candidates() and not b.lineage_candidates():
            break
    for g in b.pending():
        b.curve_step(g)
    return b


def _all_incomplete(cx: Complex) -> bool:
    from ..separatrix import partial_separatrices

    return all(not s.complete for s in partial_separatrices(cx))


def _has_chain(cx: Complex) -> bool:
    from ..nodal import nodal_components

    return any(c.uninterrupted and len(c.members) >= 2 for c in nodal_components(cx))


def random_scenario(params: GeneratorParams) -> Complex:
    for attempt in range(ATTEMPT_CAP):
        rng = random.Random(f"folires:{params.seed}:{attempt}")
        try:
            b = _build_random(params, rng, f"seed-{params.seed}")
        except (_Reject, ComplexError):
            continue
        if params.mode != "free" and not _all_incomplete(b.cx):
            continue
        if _doomed(b):
            continue
        real = params.mode == "force_nodal_chain"
        best = None
        fallback = None
        for _ in range(200):
            cx = _instantiate(b, rng, params.pool_bound, real)
            if cx is None:
                continue
            fallback = fallback or cx
            if not real or _has_chain(cx):
                best = cx
                break
        best = best or fallback
        if best is None:
            continue
        best = set_flag(best, "all_separatrices_incomplete", params.mode != "free")
        if params.nontrivial and not best.indices:
            continue
        if validate_sequence(best):
            continue
        return best
    raise GenerationError(f"rejection sampling exhausted {ATTEMPT_CAP} attempts for seed {params.seed}")


def darboux_jouanolou(m: int) -> Complex:
    if m < 1:
        raise ValueError("m must be at least 1")
    lines = m * m + m + 1
    rng = random.Random(f"folires:dj:{m}")
    for _ in range(ATTEMPT_CAP):
        b = _Builder(f"dj-{m}", rng)
        b.origin(True, [], lines)
        for g in natsorted(b.germ_sheets):
            b.curve_step(g)
        cx = _instantiate(b, rng, 8, False)
        if cx is not None:
            return set_flag(cx, "all_separatrices_incomplete", True)
    raise GenerationError("could not fill indices for the Darboux-Jouanolou complex")
