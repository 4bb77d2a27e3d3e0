"""Perfect matchings of experiment graphs.

Vertices are photon paths, edges are pair sources carrying a mode label. Each
perfect matching is one way for every path to receive exactly one photon, i.e.
one term of the emitted superposition.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Edge:
    u: object
    v: object
    mode: int = 0


@dataclass(frozen=True)
class Graph:
    vertices: tuple
    edges: tuple

    def __post_init__(self):
        vs = tuple(self.vertices)
        if len(set(vs)) != len(vs):
            raise ValueError("duplicate vertex labels")
        es = tuple(e if isinstance(e, Edge) else Edge(*e) for e in self.edges)
        for e in es:
            if e.u not in vs or e.v not in vs:
                raise ValueError(f"edge {e} references an unknown vertex")
            if e.u == e.v:
                raise ValueError(f"self-loop at {e.u}")
        object.__setattr__(self, "vertices", vs)
        object.__setattr__(self, "edges", es)

    @classmethod
    def from_json(cls, text: str | dict) -> "Graph":
        d = json.loads(text) if isinstance(text, str) else text
        if not isinstance(d, dict) or set(d) - {"vertices", "edges"}:
            raise ValueError("graph JSON needs exactly 'vertices' and 'edges'")
        edges = []
        for e in d.get("edges", []):
            if set(e) - {"u", "v", "mode"} or not {"u", "v"} <= set(e):
                raise ValueError(f"malformed edge {e}")
            edges.append(Edge(e["u"], e["v"], int(e.get("mode", 0))))
        return cls(tuple(d.get("vertices", [])), tuple(edges))


def matchings(g: Graph) -> list[tuple[Edge, ...]]:
    """All edge subsets covering every vertex exactly once.

    Backtracking enumeration: the lowest uncovered vertex must be covered by one
    of its incident edges, so each subset is produced exactly once.
    """
    order = {v: k for k, v in enumerate(g.vertices)}
    out = []

    def rec(uncovered: frozenset, chosen: list):
        if not uncovered:
            out.append(tuple(chosen))
            return
        first = min(uncovered, key=order.__getitem__)
        for e in g.edges:
            if first in (e.u, e.v):
                other = e.v if e.u == first else e.u
                if other in uncovered:
                    rec(uncovered - {first, other}, chosen + [e])

    if len(g.vertices) % 2 == 0:
        rec(frozenset(g.vertices), [])
    return out


def perfect_matchings(g: Graph) -> int:
    """Number of perfect matchings; the empty graph has one (the empty matching)."""
    return len(matchings(g))


def state_terms(g: Graph) -> list[str]:
    """Ket label per matching: the mode delivered to each vertex, in vertex order."""
    terms = []
    for m in matchings(g):
        mode = {}
        for e in m:
            mode[e.u] = mode[e.v] = e.mode
        terms.append("|" + "".join(str(mode[v]) for v in g.vertices) + ">")
    return terms


def permanent(a) -> float:
    """Permanent by Ryser's formula."""
    a = np.asarray(a, float)
    n = len(a)
    if n == 0:
        return 1.0
    total = 0.0
    for r in range(1, n + 1):
        for cols in itertools.combinations(range(n), r):
            total += (-1) ** r * np.prod(a[:, cols].sum(axis=1))
    return float((-1) ** n * total)


def biadjacency(g: Graph, left, right) -> np.ndarray:
    """Edge-multiplicity matrix between two vertex classes."""
    li = {v: k for k, v in enumerate(left)}
    ri = {v: k for k, v in enumerate(right)}
    b = np.zeros((len(left), len(right)))
    for e in g.edges:
        if e.u in li and e.v in ri:
            b[li[e.u], ri[e.v]] += 1
        elif e.v in li and e.u in ri:
            b[li[e.v], ri[e.u]] += 1
        else:
            raise ValueError("graph is not bipartite with the given classes")
    return b


def chip_state_from_graph(g: Graph) -> np.ndarray | None:
    """Two-path graphs map onto the chip: one source per edge, mode = source index."""
    if len(g.vertices) != 2 or any(not 0 <= e.mode <= 2 for e in g.edges):
        return None
    amps = np.zeros(3)
    for e in g.edges:
        amps[e.mode] += 1
    if not amps.any():
        return None
    return amps / np.linalg.norm(amps)
