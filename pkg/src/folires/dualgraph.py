"""Dual graphs of the compact invariant components and chain transforms."""

from __future__ import annotations

import random
from fractions import Fraction
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import networkx as nx

from .complex import Complex, ComplexError, natkey, natsorted
from .index import Violation
from .scalar import ONE, Scalar


class ChainError(ValueError):
    pass


@dataclass(frozen=True)
class DualGraph:
    level: int
    vertices: tuple[str, ...]
    wedges: tuple[tuple[str, str, str], ...]  # (corner id, vertex, vertex)
    indices: dict  # (corner, vertex) -> Scalar

    def wedge(self, w: str) -> tuple[str, str]:
        for cid, a, b in self.wedges:
            if cid == w:
                return a, b
        raise ChainError(f"unknown wedge {w}")

    def to_networkx(self) -> nx.MultiGraph:
        g = nx.MultiGraph()
        g.add_nodes_from(self.vertices)
        for cid, a, b in self.wedges:
            g.add_edge(a, b, key=cid)
        return g


def _direct(cx: Complex, k: int) -> tuple[set, set]:
    lv = cx.level(k)
    verts = {c for c, r in lv.components.items() if r.compact and r.invariant}
    wedges = set()
    for cid, rec in lv.curves.items():
        if rec.kind == "corner" and len(rec.housing) == 2 and set(rec.housing) <= verts:
            wedges.add((cid,) + tuple(natsorted(rec.housing)))
    return verts, wedges


def _stepwise(cx: Complex, k: int) -> tuple[set, set]:
    verts: set = set()
    wedges: set = set()
    for st in cx.steps[:k]:
        if st.kind != "point" or st.dicritical:
            continue
        new = st.component
        comp = cx.component(new)
        if not comp.compact:
            continue
        verts.add(new)
        around = [c for c in cx.level(st.k - 1).points[st.center].components if c in verts and c != new]
        # cases 1-4: zero to three compact invariant components through the center
        for c in around:
            wedges.add((f"L({st.k},{c[1:]})",) + tuple(natsorted((c, new))))
    return verts, wedges


def build_dual_graph(cx: Complex, k: Optional[int] = None) -> DualGraph:
    if k is None:
        k = cx.N
    verts, wedges = _direct(cx, k)
    sverts, swedges = _stepwise(cx, k)
    if (verts, wedges) != (sverts, swedges):
        raise ComplexError(f"dual graph mismatch at level {k}: incidence {sorted(wedges)} vs stepwise {sorted(swedges)}")
    pairs = [tuple(w[1:]) for w in wedges]
    if len(pairs) != len(set(pairs)):
        raise ComplexError(f"two wedges join the same vertices at level {k}")
    idx = {}
    for cid, a, b in wedges:
        for v in (a, b):
            val = cx.index(cid, v)
            if val is not None:
                idx[(cid, v)] = val
    return DualGraph(k, tuple(natsorted(verts)), tuple(sorted(wedges, key=lambda w: tuple(map(natkey, w)))), idx)


def _validate_chain(g: DualGraph, chain: Sequence[str]) -> None:
    if not chain or len(chain) % 2 == 0:
        raise ChainError("a chain alternates vertex, wedge, ..., vertex")
    for v in chain[::2]:
        if v not in g.vertices:
            raise ChainError(f"unknown vertex {v}")
    for n in range(1, len(chain), 2):
        a, b = g.wedge(chain[n])
        if {chain[n - 1], chain[n + 1]} != {a, b}:
            raise ChainError(f"wedge {chain[n]} does not join {chain[n - 1]} and {chain[n + 1]}")


def chain_transform(g: DualGraph, chain: Sequence[str], mu: Scalar) -> Scalar:
    mu = Scalar.coerce(mu)
    if not mu:
        raise ChainError("mu must be nonzero")
    _validate_chain(g, chain)
    out = mu
    for n in range(1, len(chain), 2):
        alpha = g.indices.get((chain[n], chain[n + 1]))
        if alpha is None:
            raise ChainError(f"missing index of {chain[n]} on {chain[n + 1]}")
        out = -alpha * out
    return out


def reverse_chain(chain: Sequence[str]) -> list[str]:
    return list(reversed(chain))


def _cycle_chains(g: DualGraph, max_len: int) -> list[list[str]]:
    """Simple cycles as closed chains; parallel wedges cannot occur."""
    simple = nx.Graph()
    simple.add_nodes_from(g.vertices)
    by_pair = {}
    for cid, a, b in g.wedges:
        simple.add_edge(a, b)
        by_pair[frozenset((a, b))] = cid
    chains = []
    for cyc in nx.simple_cycles(simple, length_bound=max_len):
        if len(cyc) < 3:
            continue
        start = min(range(len(cyc)), key=lambda n: natkey(cyc[n]))
        cyc = cyc[start:] + cyc[:start]
        ch = [cyc[0]]
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            ch += [by_pair[frozenset((a, b))], b]
        chains.append(ch)
    # out-and-back along each wedge
    for cid, a, b in g.wedges:
        chains.append([a, cid, b, cid, a])
    chains.sort(key=lambda ch: [natkey(x) for x in ch])
    return chains


def random_closed_walk(g: DualGraph, rng: random.Random, max_steps: int = 30) -> Optional[list[str]]:
    adj: dict[str, list[tuple[str, str]]] = {v: [] for v in g.vertices}
    for cid, a, b in g.wedges:
        adj[a].append((cid, b))
        adj[b].append((cid, a))
    starts = [v for v in g.vertices if adj[v]]
    if not starts:
        return None
    v0 = rng.choice(starts)
    chain = [v0]
    cur = v0
    for _ in range(max_steps):
        cid, nxt = rng.choice(adj[cur])
        chain += [cid, nxt]
        cur = nxt
        if cur == v0:
            return chain
    # close the walk along a shortest path back
    path = nx.shortest_path(g.to_networkx(), cur, v0)
    for a, b in zip(path, path[1:]):
        cid = next(c for c, n in adj[a] if n == b)
        chain += [cid, b]
    return chain


def random_mu(rng: random.Random, bound: int = 8) -> Scalar:
    while True:
        mu = Scalar(*(Fraction(rng.randint(-bound, bound), rng.randint(1, bound)) for _ in range(4)))
        if mu:
            return mu


def audit_circular_chains(g: DualGraph, budget: int = 50, seed: int = 0, mus: Optional[Iterable[Scalar]] = None,
                          max_len: int = 12) -> list[Violation]:
    rng = random.Random(seed)
    mus = list(mus) if mus is not None else [random_mu(rng) for _ in range(10)]
    chains = _cycle_chains(g, max_len)
    for _ in range(budget):
        walk = random_closed_walk(g, rng)
        if walk is not None:
            chains.append(walk)
    out = []
    for ch in chains:
        # the transform is multiplication by a fixed factor, so evaluate it once
        try:
            factor = chain_transform(g, ch, ONE)
        except ChainError as exc:
            out.append(Violation("circular-chain", "-".join(ch), str(exc)))
            continue
        for mu in mus:
            val = factor * mu
            if val != mu:
                out.append(Violation("circular-chain", "-".join(ch), f"c(mu) = {val.render()} for mu = {mu.render()}"))
                break
    return out


def export_dot(g: DualGraph, annotations: Optional[dict] = None) -> str:
    """Deterministic DOT text.

    ``annotations`` may hold sets under ``nodal`` (corner ids), ``separatrix``
    (vertex ids) and ``incomplete`` (vertex ids) used for coloring.
    """
    ann = annotations or {}
    nodal = set(ann.get("nodal", ()))
    sep = set(ann.get("separatrix", ()))
    inc = set(ann.get("incomplete", ()))
    lines = [f"// dual graph at level {g.level}"]
    if not g.vertices:
        lines.append("graph G {}")
        return "\n".join(lines) + "\n"
    lines.append("graph G {")
    for v in g.vertices:
        attrs = [f'label="{v}"']
        if v in inc:
            attrs.append('color="red"')
        elif v in sep:
            attrs.append('color="blue"')
        lines.append(f'  "{v}" [{", ".join(attrs)}];')
    for cid, a, b in g.wedges:
        ia = g.indices.get((cid, a))
        ib = g.indices.get((cid, b))
        label = f"{cid} {a}:{ia.render() if ia else '?'} {b}:{ib.render() if ib else '?'}"
        attrs = [f'label="{label}"']
        if cid in nodal:
            attrs.append('color="green"')
        lines.append(f'  "{a}" -- "{b}" [{", ".join(attrs)}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
