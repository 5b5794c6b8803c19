"""Line-oriented scenario files.

Records (one per line, ``#`` starts a comment)::

    version 1
    field qsqrt2i
    flag all_separatrices_incomplete <true|false>
    germ <id> at <point>
    singstar <level> <entity>
    tangent <curve> <curve> at <point>
    step <k> point <point> <dicritical|nondicritical>
    step <k> curve <curve>
    trace <id> in <component> at <point> [degree <d>]
    index <curve> side <component> (a,b,c,d)

``germ``, ``tangent`` and ``trace`` apply to the current level, i.e. after
the most recent ``step``.
"""

from __future__ import annotations

import re
from ..complex import (
    Complex,
    ComplexError,
    blow_up_curve,
    blow_up_point,
    declare_germ,
    declare_tangent,
    declare_trace,
    mark_singstar,
    natkey,
    natsorted,
    new_ambient,
    set_flag,
)
from ..index import assign_indices
from ..scalar import Scalar, classify

FLAGS = ("all_separatrices_incomplete",)


class ParseError(ValueError):
    def __init__(self, line: int, column: int, token: str, message: str):
        super().__init__(f"line {line}, column {column}: {message} (at {token!r})")
        self.line = line
        self.column = column
        self.token = token
        self.message = message


_TOKEN_RE = re.compile(r"\([^)]*\)|\S+")


def _tokens(line: str) -> list[tuple[str, int]]:
    out = []
    for m in _TOKEN_RE.finditer(line):
        out.append((m.group(0), m.start() + 1))
    return out


def parse_scenario(text: str) -> Complex:
    cx = new_ambient("scenario")
    header = {"version": False, "field": False}
    indices: dict[tuple[str, str], tuple[Scalar, int, int, str]] = {}
    last = 0
    lineno = 0
    lines = text.split("\n")
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].rstrip("\r")
        toks = _tokens(line)
        if not toks:
            continue
        head, hcol = toks[0]

        def fail(msg: str, n: int = 0):
            tok, col = toks[n] if n < len(toks) else ("<end of line>", len(line) + 1)
            raise ParseError(lineno, col, tok, msg)

        def need(n: int):
            if len(toks) != n:
                fail(f"record '{head}' expects {n - 1} fields", min(len(toks), n))

        try:
            if head == "version":
                need(2)
                if toks[1][0] != "1":
                    fail("unsupported version", 1)
                header["version"] = True
            elif head == "field":
                need(2)
                if toks[1][0] != "qsqrt2i":
                    fail("field-tag mismatch", 1)
                header["field"] = True
            elif not header["version"] or not header["field"]:
                fail("missing version/field header")
            elif head == "flag":
                need(3)
                if toks[1][0] not in FLAGS:
                    fail("unknown flag", 1)
                if toks[2][0] not in ("true", "false"):
                    fail("flag value must be true or false", 2)
                cx = set_flag(cx, toks[1][0], toks[2][0] == "true")
            elif head == "germ":
                need(4)
                if toks[2][0] != "at":
                    fail("expected 'at'", 2)
                cx = declare_germ(cx, toks[1][0], toks[3][0])
            elif head == "singstar":
                need(3)
                level = _int(toks, 1, fail)
                if level > cx.N:
                    fail("Sing* marker for a future level", 1)
                cx = mark_singstar(cx, level, toks[2][0])
            elif head == "tangent":
                need(5)
                if toks[3][0] != "at":
                    fail("expected 'at'", 3)
                cx = declare_tangent(cx, toks[1][0], toks[2][0], toks[4][0])
            elif head == "step":
                if len(toks) < 4:
                    fail("truncated step record", len(toks))
                k = _int(toks, 1, fail)
                if k != last + 1:
                    fail(f"expected step {last + 1}", 1)
                kind = toks[2][0]
                if kind == "point":
                    need(5)
                    nat = toks[4][0]
                    if nat not in ("dicritical", "nondicritical"):
                        fail("expected dicritical or nondicritical", 4)
                    cx = blow_up_point(cx, toks[3][0], nat == "dicritical", strict=False)
                elif kind == "curve":
                    need(4)
                    cx = blow_up_curve(cx, toks[3][0], strict=False)
                else:
                    fail("step kind must be point or curve", 2)
                last = k
            elif head == "trace":
                if len(toks) not in (6, 8):
                    fail("record 'trace' expects: trace <id> in <component> at <point> [degree <d>]", min(len(toks), 6))
                if toks[2][0] != "in":
                    fail("expected 'in'", 2)
                if toks[4][0] != "at":
                    fail("expected 'at'", 4)
                degree = 1
                if len(toks) == 8:
                    if toks[6][0] != "degree":
                        fail("expected 'degree'", 6)
                    degree = _int(toks, 7, fail)
                    if degree < 1:
                        fail("degree must be positive", 7)
                cx = declare_trace(cx, toks[1][0], toks[3][0], toks[5][0], degree)
            elif head == "index":
                need(5)
                if toks[2][0] != "side":
                    fail("expected 'side'", 2)
                try:
                    value = Scalar.parse(toks[4][0])
                except ValueError as exc:
                    fail(str(exc), 4)
                key = (toks[1][0], toks[3][0])
                if key in indices:
                    fail("duplicate assignment", 1)
                indices[key] = (value, lineno, toks[4][1], toks[4][0])
            else:
                fail(f"unknown record '{head}'")
        except ComplexError as exc:
            raise ParseError(lineno, hcol, head, str(exc)) from None
    if not header["version"] or not header["field"]:
        raise ParseError(lineno, 1, "<end of file>", "missing version/field header")
    final = cx.level().curves
    for (curve, side), (value, ln, col, tok) in indices.items():
        try:
            rec = cx.curve(curve)
        except ComplexError as exc:
            raise ParseError(ln, 7, curve, str(exc)) from None
        if not value:
            raise ParseError(ln, col, tok, "zero index")
        if curve in final and rec.kind == "trace" and classify(value) == "invalid":
            raise ParseError(ln, col, tok, "positive rational index on a final trace curve")
        if rec.kind == "corner":
            other = [h for h in rec.housing if h != side]
            if other and (curve, other[0]) in indices:
                if indices[(curve, other[0])][0] * value != Scalar(1):
                    raise ParseError(ln, col, tok, f"reciprocity conflict on {curve}")
    try:
        cx = assign_indices(cx, {k: v[0] for k, v in indices.items()})
    except ComplexError as exc:
        raise ParseError(lineno, 1, "index", str(exc)) from None
    return cx


def _int(toks, n, fail) -> int:
    try:
        return int(toks[n][0])
    except ValueError:
        fail("expected an integer", n)
        raise


def render_scenario(cx: Complex) -> str:
    out = ["version 1", "field qsqrt2i"]
    for f in FLAGS:
        out.append(f"flag {f} {'true' if cx.flags.get(f) else 'false'}")
    lv0 = cx.level(0)
    for g in natsorted(lv0.curves):
        (p,) = [q for q, r in lv0.points.items() if g in r.curves]
        out.append(f"germ {g} at {p}")
    for k in range(cx.N + 1):
        lv = cx.level(k)
        if k > 0:
            st = cx.step(k)
            if st.kind == "point":
                out.append(f"step {k} point {st.center} {'dicritical' if st.dicritical else 'nondicritical'}")
            else:
                out.append(f"step {k} curve {st.center}")
            records = []
            for cid in natsorted(lv.curves):
                rec = lv.curves[cid]
                if rec.kind != "trace" or rec.birth_level != k:
                    continue
                for p in cx.points_on(k, cid):
                    created = lv.points[p].birth_level == k and cid in _name_ids(p)
                    records.append((0 if created else 1, natkey(cid), natkey(p), cid, p, rec.degree))
            records.sort()
            for _, _, _, cid, p, deg in records:
                extra = f" degree {deg}" if deg != 1 else ""
                out.append(f"trace {cid} in {lv.curves[cid].housing[0]} at {p}{extra}")
        for e in natsorted(lv.singstar):
            out.append(f"singstar {k} {e}")
        for pair, at in sorted(lv.tangents, key=lambda t: (natkey(t[1]), sorted(map(natkey, t[0])))):
            a, b = natsorted(pair)
            out.append(f"tangent {a} {b} at {at}")
    for (curve, side) in sorted(cx.indices, key=lambda t: (natkey(t[0]), natkey(t[1]))):
        out.append(f"index {curve} side {side} {cx.indices[(curve, side)].render()}")
    return "\n".join(out) + "\n"


def _name_ids(p: str) -> list[str]:
    m = re.match(r"^P\((.*)\)(#\d+)?$", p)
    return m.group(1).split(",") if m else []


def structurally_equal(a: Complex, b: Complex) -> bool:
    return (
        a.levels == b.levels
        and a.steps == b.steps
        and dict(a.indices) == dict(b.indices)
        and dict(a.parent) == dict(b.parent)
        and dict(a.born) == dict(b.born)
        and {k: v for k, v in a.flags.items() if v} == {k: v for k, v in b.flags.items() if v}
    )
