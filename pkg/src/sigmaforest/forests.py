"""Spanning trees of the augmented graph: enumeration, tree law, Wilson sampler.

A spanning tree T of Gamma_rho decomposes into the forest F(T) = T ∩ E on
the base graph and the root set R(T) of vertices attached to rho.  Edges
are canonical (a, b) pairs with a < b and rho encoded as 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import logsumexp

from .graphs import AugmentedGraph, _DisjointSet

ENUMERATION_GUARD = 12  # max |V_rho| for exact enumeration


class EnumerationGuardError(ValueError):
    """Instance too large for exact spanning-tree enumeration."""


@dataclass(frozen=True)
class SpanningTree:
    """Edge set of a spanning tree of Gamma_rho on vertices {0, 1, .., n}."""

    n: int  # number of base vertices; rho is index 0
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        if len(self.edges) != self.n:
            raise ValueError("a spanning tree of Gamma_rho has |V| edges")

    @cached_property
    def forest(self) -> frozenset[tuple[int, int]]:
        """F(T): the edges of T inside the base graph."""
        return frozenset(e for e in self.edges if e[0] != 0)

    @cached_property
    def roots(self) -> frozenset[int]:
        """R(T): vertices attached directly to rho."""
        return frozenset(e[1] for e in self.edges if e[0] == 0)

    @cached_property
    def _forest_components(self) -> dict[int, int]:
        dsu = _DisjointSet(self.n + 1)
        for a, b in self.forest:
            dsu.union(a, b)
        return {v: dsu.find(v) for v in range(1, self.n + 1)}


def forest_and_roots(tree: SpanningTree) -> tuple[frozenset[tuple[int, int]], frozenset[int]]:
    return tree.forest, tree.roots


def tree_from_forest_and_roots(n: int, forest, roots) -> SpanningTree:
    """Inverse of forest_and_roots (the natural bijection)."""
    edges = set(tuple(sorted(e)) for e in forest)
    edges.update((0, r) for r in roots)
    return SpanningTree(n=n, edges=frozenset(edges))


def connected_in_forest(tree: SpanningTree, x: int, y: int) -> bool:
    """True iff x and y lie in the same component of F(T) (rho excluded)."""
    if x == y:
        return True
    comp = tree._forest_components
    return comp[x] == comp[y]


def _validate_tree(ag: AugmentedGraph, tree: SpanningTree) -> None:
    allowed = {(a, b) for a, b, _ in ag.all_edges}
    if not set(tree.edges) <= allowed:
        raise ValueError("tree uses edges not present in Gamma_rho")


def enumerate_spanning_trees(ag: AugmentedGraph) -> list[SpanningTree]:
    """All spanning trees of Gamma_rho, each exactly once.

    Recursive include/exclude over the edge list with cycle detection and
    an edge-count prune; guarded at |V_rho| <= ENUMERATION_GUARD.
    """
    n = ag.n
    if n + 1 > ENUMERATION_GUARD:
        raise EnumerationGuardError(
            f"|V_rho| = {n + 1} exceeds enumeration guard {ENUMERATION_GUARD}")
    edge_list = [(a, b) for a, b, _ in ag.all_edges]
    m = len(edge_list)
    trees: list[SpanningTree] = []
    chosen: list[tuple[int, int]] = []

    def rec(idx: int, parent: list[int], n_chosen: int) -> None:
        if n_chosen == n:
            trees.append(SpanningTree(n=n, edges=frozenset(chosen)))
            return
        if m - idx < n - n_chosen:
            return
        a, b = edge_list[idx]
        # DSU with path copy so branches stay independent.
        def find(p, v):
            while p[v] != v:
                v = p[v]
            return v
        ra, rb = find(parent, a), find(parent, b)
        if ra != rb:
            p2 = list(parent)
            p2[rb] = ra
            chosen.append((a, b))
            rec(idx + 1, p2, n_chosen + 1)
            chosen.pop()
        rec(idx + 1, parent, n_chosen)

    rec(0, list(range(n + 1)), 0)
    return trees


def log_tree_weight(ag: AugmentedGraph, tree: SpanningTree, t: np.ndarray) -> float:
    """log prod_{(i~j) in T} beta_ij e^{t_i+t_j}, with t_rho = 0."""
    t = np.asarray(t, dtype=float)
    wmap = {(min(a, b), max(a, b)): w for a, b, w in ag.all_edges}
    total = 0.0
    for a, b in tree.edges:
        ta = 0.0 if a == 0 else t[a - 1]
        tb = t[b - 1]
        total += np.log(wmap[(a, b)]) + ta + tb
    return float(total)


@dataclass(frozen=True)
class TreeLaw:
    """The conditional law of T given t: probabilities prop. to tree weights."""

    ag: AugmentedGraph
    t: tuple[float, ...]
    trees: tuple[SpanningTree, ...]
    log_weights: np.ndarray
    log_normalizer: float

    @cached_property
    def probs(self) -> np.ndarray:
        return np.exp(self.log_weights - self.log_normalizer)

    def prob(self, tree: SpanningTree) -> float:
        for s, p in zip(self.trees, self.probs):
            if s.edges == tree.edges:
                return float(p)
        return 0.0

    def event_prob(self, predicate) -> float:
        """Probability of {T : predicate(T)} under the law."""
        return float(sum(p for s, p in zip(self.trees, self.probs) if predicate(s)))

    def expectation(self, fn) -> float:
        return float(sum(p * fn(s) for s, p in zip(self.trees, self.probs)))


def tree_law(ag: AugmentedGraph, t: np.ndarray) -> TreeLaw:
    t = np.asarray(t, dtype=float)
    trees = enumerate_spanning_trees(ag)
    logw = np.array([log_tree_weight(ag, s, t) for s in trees])
    return TreeLaw(ag=ag, t=tuple(t), trees=tuple(trees),
                   log_weights=logw, log_normalizer=float(logsumexp(logw)))


class TreeEnsemble:
    """Enumerated trees of one augmented graph, with vectorized law evaluation.

    Tree weights depend on t only through sum_{(i~j) in T} (t_i + t_j),
    i.e. through the in-tree degree of each vertex, so the whole log-weight
    matrix for a batch of t-vectors is one matrix product.
    """

    def __init__(self, ag: AugmentedGraph):
        self.ag = ag
        self.trees = tuple(enumerate_spanning_trees(ag))
        wmap = {(a, b): w for a, b, w in ag.all_edges}
        n_trees = len(self.trees)
        self.log_beta = np.zeros(n_trees)
        self.degree = np.zeros((n_trees, ag.n))
        for k, tr in enumerate(self.trees):
            for a, b in tr.edges:
                self.log_beta[k] += np.log(wmap[(a, b)])
                if a != 0:
                    self.degree[k, a - 1] += 1.0
                self.degree[k, b - 1] += 1.0

    def mask(self, predicate) -> np.ndarray:
        return np.array([bool(predicate(tr)) for tr in self.trees])

    def event_probs(self, ts: np.ndarray, mask: np.ndarray) -> np.ndarray:
        """P(T in event | t) for each row of ts, via the exact law."""
        ts = np.atleast_2d(np.asarray(ts, dtype=float))
        logw = self.log_beta[:, None] + self.degree @ ts.T
        logw -= logw.max(axis=0, keepdims=True)
        w = np.exp(logw)
        return (w * mask[:, None]).sum(axis=0) / w.sum(axis=0)


def _walk_tables(ag: AugmentedGraph, t: np.ndarray):
    """Per-vertex neighbour lists and cumulative transition weights.

    Transition probabilities are proportional to incident conductances
    beta_ij e^{t_i+t_j} (t_rho = 0), exponentiated after a per-vertex
    max-log shift for overflow safety.
    """
    n = ag.n
    nbrs: list[list[int]] = [[] for _ in range(n + 1)]
    logc: list[list[float]] = [[] for _ in range(n + 1)]
    for i, j, w in ag.graph.edges:
        lw = np.log(w) + t[i - 1] + t[j - 1]
        nbrs[i].append(j)
        logc[i].append(lw)
        nbrs[j].append(i)
        logc[j].append(lw)
    for _, i, e in ag.rho_edges:
        nbrs[i].append(0)
        logc[i].append(np.log(e) + t[i - 1])
    cum = [np.zeros(0)] * (n + 1)
    for v in range(1, n + 1):
        lc = np.array(logc[v])
        if not np.all(np.isfinite(lc)):
            raise ValueError("nonfinite walk conductance")
        cum[v] = np.cumsum(np.exp(lc - np.max(lc)))
    return nbrs, cum


def sample_tree_wilson(ag: AugmentedGraph, t: np.ndarray,
                       rng: np.random.Generator) -> SpanningTree:
    """One exact draw from the tree law via loop-erased random walks rooted at rho."""
    t = np.asarray(t, dtype=float)
    n = ag.n
    nbrs, cum = _walk_tables(ag, t)
    in_tree = [False] * (n + 1)
    in_tree[0] = True
    nxt = [-1] * (n + 1)
    for start in range(1, n + 1):
        u = start
        while not in_tree[u]:
            c = cum[u]
            k = int(np.searchsorted(c, rng.random() * c[-1], side="right"))
            nxt[u] = nbrs[u][k]
            u = nxt[u]
        u = start
        while not in_tree[u]:
            in_tree[u] = True
            u = nxt[u]
    edges = frozenset((min(v, nxt[v]), max(v, nxt[v])) for v in range(1, n + 1))
    return SpanningTree(n=n, edges=edges)
