"""Finite weighted graphs, pinning profiles, and the ladder-graph family.

Vertices are labelled 1..n and the order is fixed at construction time;
all signed-minor conventions elsewhere in the package rely on it.  The
extra pinning vertex rho is never part of a Graph: it lives implicitly in
AugmentedGraph and is encoded as index 0 wherever edges to it appear.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np


class GraphError(ValueError):
    """Invalid graph construction (disconnected, duplicate edge, bad weight)."""


class PinningError(ValueError):
    """Invalid pinning profile (e.g. all pinning strengths zero)."""


class _DisjointSet:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        p = self.parent
        while p[a] != a:
            p[a] = p[p[a]]
            a = p[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[rb] = ra
        return True


@dataclass(frozen=True)
class Graph:
    """Connected weighted graph on vertices 1..n.

    ``edges`` holds (i, j, beta) with i < j.  ``levels`` is set only for
    ladder-generated graphs and gives the level of each vertex (used by
    :func:`horizontal_distance`).
    """

    n: int
    edges: tuple[tuple[int, int, float], ...]
    levels: tuple[int, ...] | None = None

    @cached_property
    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """0-based endpoint index arrays and the weight array."""
        if not self.edges:
            z = np.zeros(0, dtype=np.intp)
            return z, z.copy(), np.zeros(0)
        ei = np.array([e[0] - 1 for e in self.edges], dtype=np.intp)
        ej = np.array([e[1] - 1 for e in self.edges], dtype=np.intp)
        w = np.array([e[2] for e in self.edges])
        return ei, ej, w

    @property
    def m(self) -> int:
        return len(self.edges)


def build_graph(n: int, edges: Iterable[tuple[int, int, float]],
                levels: Sequence[int] | None = None) -> Graph:
    """Validate and build a canonical Graph with vertices 1..n."""
    if n < 1:
        raise GraphError("vertex count must be positive")
    canon = []
    seen = set()
    dsu = _DisjointSet(n + 1)
    for i, j, beta in edges:
        if not (1 <= i <= n and 1 <= j <= n):
            raise GraphError(f"edge ({i},{j}) out of range 1..{n}")
        if i == j:
            raise GraphError(f"self-loop at vertex {i}")
        a, b = (i, j) if i < j else (j, i)
        if (a, b) in seen:
            raise GraphError(f"duplicate edge ({a},{b})")
        if not beta > 0:
            raise GraphError(f"nonpositive weight {beta} on edge ({a},{b})")
        seen.add((a, b))
        canon.append((a, b, float(beta)))
        dsu.union(a, b)
    root = dsu.find(1)
    if any(dsu.find(v) != root for v in range(2, n + 1)):
        raise GraphError("graph is not connected")
    lv = tuple(int(v) for v in levels) if levels is not None else None
    if lv is not None and len(lv) != n:
        raise GraphError("levels metadata length mismatch")
    return Graph(n=n, edges=tuple(canon), levels=lv)


@dataclass(frozen=True)
class Pinning:
    """Per-vertex profile pi >= 0 and scalar epsilon > 0; eps_i = pi_i * epsilon."""

    pi: tuple[float, ...]
    epsilon: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise PinningError("epsilon must be positive")
        if any(p < 0 for p in self.pi):
            raise PinningError("pi entries must be nonnegative")
        if not any(p > 0 for p in self.pi):
            raise PinningError("at least one pi entry must be positive")

    @cached_property
    def pi_array(self) -> np.ndarray:
        return np.array(self.pi)

    @cached_property
    def eps(self) -> np.ndarray:
        """The derived vector eps_i = pi_i * epsilon (never stored independently)."""
        return self.pi_array * self.epsilon


def uniform_pinning(n: int, epsilon: float, value: float = 1.0) -> Pinning:
    return Pinning(pi=(value,) * n, epsilon=epsilon)


def delta_pinning(n: int, x: int, epsilon: float, value: float = 1.0) -> Pinning:
    """Pinning at one point: pi = value * indicator(x)."""
    pi = [0.0] * n
    pi[x - 1] = value
    return Pinning(pi=tuple(pi), epsilon=epsilon)


@dataclass(frozen=True)
class AugmentedGraph:
    """Base graph plus the implicit vertex rho, joined to every vertex with eps_i > 0.

    rho carries t_rho = 0 and s_rho = 0 in all field evaluations and is
    encoded as vertex index 0 in tree edge sets.
    """

    graph: Graph
    pinning: Pinning

    def __post_init__(self):
        if len(self.pinning.pi) != self.graph.n:
            raise PinningError("pinning dimension does not match vertex count")

    @property
    def n(self) -> int:
        return self.graph.n

    @cached_property
    def eps(self) -> np.ndarray:
        return self.pinning.eps

    @cached_property
    def rho_edges(self) -> tuple[tuple[int, int, float], ...]:
        """Edges (0, i, eps_i) for every vertex with eps_i > 0."""
        return tuple((0, i + 1, float(e))
                     for i, e in enumerate(self.eps) if e > 0)

    @cached_property
    def all_edges(self) -> tuple[tuple[int, int, float], ...]:
        """Edge set of Gamma_rho: base edges followed by rho-edges."""
        return self.graph.edges + self.rho_edges


def augment(g: Graph, p: Pinning) -> AugmentedGraph:
    return AugmentedGraph(graph=g, pinning=p)


@dataclass(frozen=True)
class LadderSpec:
    """Strip {-l_minus..l_plus} x V0 with per-level copies of a base graph.

    ``beta_vertical`` gives one weight per base edge, ``beta_horizontal``
    one weight per base vertex; both are reused at every level, so the
    generated weights are translation invariant.
    """

    base: Graph
    l_minus: int
    l_plus: int
    beta_vertical: tuple[float, ...]
    beta_horizontal: tuple[float, ...]

    def __post_init__(self):
        if self.l_minus < 0 or self.l_plus < 0:
            raise GraphError("ladder extents must be nonnegative")
        if len(self.beta_vertical) != self.base.m:
            raise GraphError("need one vertical weight per base edge")
        if len(self.beta_horizontal) != self.base.n:
            raise GraphError("need one horizontal weight per base vertex")

    @property
    def n_levels(self) -> int:
        return self.l_minus + self.l_plus + 1

    def vertex(self, level: int, v0: int) -> int:
        """1-based ladder index of base vertex v0 at the given level."""
        if not (-self.l_minus <= level <= self.l_plus):
            raise GraphError(f"level {level} outside [-{self.l_minus}, {self.l_plus}]")
        if not (1 <= v0 <= self.base.n):
            raise GraphError(f"base vertex {v0} out of range")
        return (level + self.l_minus) * self.base.n + v0


def ladder_spec(base: Graph, l_minus: int, l_plus: int,
                beta_vertical: float | Sequence[float] = 1.0,
                beta_horizontal: float | Sequence[float] = 1.0) -> LadderSpec:
    """Convenience constructor accepting scalar weights."""
    bv = ((float(beta_vertical),) * base.m
          if np.isscalar(beta_vertical) else tuple(map(float, beta_vertical)))
    bh = ((float(beta_horizontal),) * base.n
          if np.isscalar(beta_horizontal) else tuple(map(float, beta_horizontal)))
    return LadderSpec(base=base, l_minus=l_minus, l_plus=l_plus,
                      beta_vertical=bv, beta_horizontal=bh)


def build_ladder(spec: LadderSpec) -> Graph:
    """Generate the ladder graph; vertex order is lexicographic (level, base order)."""
    n0 = spec.base.n
    edges = []
    for k in range(spec.n_levels):
        off = k * n0
        for (i, j, _), bv in zip(spec.base.edges, spec.beta_vertical):
            edges.append((off + i, off + j, bv))
        if k + 1 < spec.n_levels:
            for v in range(1, n0 + 1):
                edges.append((off + v, off + n0 + v, spec.beta_horizontal[v - 1]))
    levels = [lvl for lvl in range(-spec.l_minus, spec.l_plus + 1) for _ in range(n0)]
    return build_graph(spec.n_levels * n0, edges, levels=levels)


def horizontal_distance(g: Graph, x: int, y: int) -> int:
    """|level(x) - level(y)| on a ladder-generated graph."""
    if g.levels is None:
        raise GraphError("graph carries no ladder level metadata")
    if not (1 <= x <= g.n and 1 <= y <= g.n):
        raise GraphError("vertex out of range")
    return abs(g.levels[x - 1] - g.levels[y - 1])


def read_graph_file(path) -> Graph:
    """Parse the plain-text format: first line `n m`, then m lines `i j beta`."""
    with open(path) as fh:
        tokens = fh.read().split()
    if len(tokens) < 2:
        raise GraphError("graph file too short")
    n, m = int(tokens[0]), int(tokens[1])
    if len(tokens) != 2 + 3 * m:
        raise GraphError(f"expected {m} edge lines in graph file")
    edges = []
    for k in range(m):
        i, j, beta = tokens[2 + 3 * k: 5 + 3 * k]
        edges.append((int(i), int(j), float(beta)))
    return build_graph(n, edges)


def write_graph_file(g: Graph, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"{g.n} {g.m}\n")
        for i, j, beta in g.edges:
            fh.write(f"{i} {j} {beta!r}\n")
