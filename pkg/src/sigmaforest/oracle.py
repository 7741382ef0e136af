"""Brute-force cross-checks of the exact identities, for tests and `verify`.

Everything here is deliberately independent of the production code paths:
spanning trees are enumerated by trying all edge subsets, determinants
are expanded by cofactors, and weights are multiplied in linear scale.
Only Graph/AugmentedGraph construction is shared.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .graphs import AugmentedGraph, Graph, Pinning, augment
from .linalg import logdet_pinned, pinned_matrix, signed_minor_det

REL_TOL = 1e-10
ABS_TOL = 1e-12


def cofactor_det(m: np.ndarray) -> float:
    """Determinant via first-row cofactor expansion (n <= 7)."""
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    if n > 8:
        raise ValueError("cofactor expansion limited to small matrices")
    if n == 1:
        return float(m[0, 0])
    total = 0.0
    for j in range(n):
        if m[0, j] == 0.0:
            continue
        sub = np.delete(np.delete(m, 0, axis=0), j, axis=1)
        total += (-1.0) ** j * m[0, j] * cofactor_det(sub)
    return total


def _rho_edge_list(ag: AugmentedGraph) -> list[tuple[int, int, float]]:
    """Edges of Gamma_rho as (a, b, weight) with rho = 0 and a < b."""
    return [(i, j, w) for i, j, w in ag.graph.edges] + list(ag.rho_edges)


def _spans(n_vertices: int, edges) -> bool:
    parent = list(range(n_vertices))

    def find(v):
        while parent[v] != v:
            v = parent[v]
        return v

    comps = n_vertices
    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra == rb:
            return False  # cycle
        parent[rb] = ra
        comps -= 1
    return comps == 1


def brute_spanning_trees(ag: AugmentedGraph) -> list[tuple[tuple[int, int, float], ...]]:
    """All spanning trees of Gamma_rho by exhaustive subset search."""
    edges = _rho_edge_list(ag)
    n_v = ag.n + 1
    trees = []
    for subset in itertools.combinations(edges, n_v - 1):
        if _spans(n_v, [(a, b) for a, b, _ in subset]):
            trees.append(subset)
    return trees


def _tree_weight(tree, t: np.ndarray) -> float:
    w = 1.0
    for a, b, beta in tree:
        ta = 0.0 if a == 0 else t[a - 1]
        tb = t[b - 1]
        w *= beta * np.exp(ta + tb)
    return w


def _roots(tree) -> set[int]:
    return {b for a, b, _ in tree if a == 0}


def _forest(tree) -> list[tuple[int, int]]:
    return [(a, b) for a, b, _ in tree if a != 0]


def _connected_in_forest(n: int, forest, x: int, y: int) -> bool:
    parent = list(range(n + 1))

    def find(v):
        while parent[v] != v:
            v = parent[v]
        return v

    for a, b in forest:
        parent[find(b)] = find(a)
    return find(x) == find(y)


def oracle_matrix_tree(ag: AugmentedGraph, t: np.ndarray) -> tuple[float, float]:
    """(log det of the pinned Laplacian, log of the brute-force tree sum)."""
    t = np.asarray(t, dtype=float)
    lhs = logdet_pinned(ag.graph, ag.pinning, t)
    rhs = float(np.log(sum(_tree_weight(tr, t) for tr in brute_spanning_trees(ag))))
    return lhs, rhs


def oracle_minor_forest(ag: AugmentedGraph, t: np.ndarray, x: int, y: int
                        ) -> tuple[float, float]:
    """Signed minor of the pinned Laplacian vs the forest sum over trees
    rooting the (x <-> y)-component at x."""
    t = np.asarray(t, dtype=float)
    lhs = signed_minor_det(pinned_matrix(ag.graph, ag.pinning, t), x, y)
    eps = ag.eps
    rhs = 0.0
    for tr in brute_spanning_trees(ag):
        roots = _roots(tr)
        forest = _forest(tr)
        if x not in roots or not _connected_in_forest(ag.n, forest, x, y):
            continue
        term = 1.0
        for j in roots - {x}:
            term *= eps[j - 1] * np.exp(t[j - 1])
        for i, j in forest:
            beta = next(w for a, b, w in ag.graph.edges if (a, b) == (i, j))
            term *= beta * np.exp(t[i - 1] + t[j - 1])
        rhs += term
    return lhs, rhs


def oracle_green_formula(ag: AugmentedGraph, t: np.ndarray, x: int, y: int) -> dict:
    """Check both one-sided Green identities and the assembled formula.

    eps_x e^{t_x} (A+eps_hat)^{-1}_{xy} = P(x roots the xy-component), and
    the same with x and y swapped; the assembled Green's function is the
    rescaled union probability.
    """
    t = np.asarray(t, dtype=float)
    eps = ag.eps
    if eps[x - 1] + eps[y - 1] <= 0:
        raise ValueError("need eps_x + eps_y > 0")
    m = pinned_matrix(ag.graph, ag.pinning, t)
    inv_xy = float(np.linalg.solve(m, np.eye(ag.n))[x - 1, y - 1])

    trees = brute_spanning_trees(ag)
    weights = np.array([_tree_weight(tr, t) for tr in trees])
    z = float(np.sum(weights))
    p_x = p_y = 0.0
    for tr, w in zip(trees, weights):
        if not _connected_in_forest(ag.n, _forest(tr), x, y):
            continue
        roots = _roots(tr)
        if x in roots:
            p_x += w / z
        if y in roots:
            p_y += w / z
    lhs_x = eps[x - 1] * np.exp(t[x - 1]) * inv_xy
    lhs_y = eps[y - 1] * np.exp(t[y - 1]) * inv_xy
    denom = eps[x - 1] * np.exp(t[x - 1]) + eps[y - 1] * np.exp(t[y - 1])
    green_lhs = float(np.exp(t[x - 1] + t[y - 1]) * inv_xy)
    green_rhs = float(np.exp(t[x - 1] + t[y - 1])) / denom * (p_x + p_y)
    return {
        "green1": (float(lhs_x), float(p_x)),
        "green2": (float(lhs_y), float(p_y)),
        "assembled": (green_lhs, green_rhs),
    }


def rel_gap(lhs: float, rhs: float) -> float:
    scale = max(abs(lhs), abs(rhs))
    if scale < ABS_TOL:
        return 0.0
    return abs(lhs - rhs) / scale


# ---------------------------------------------------------------------------
# Bundled small-graph corpus and the verification suite behind `cli verify`.

def bundled_graphs() -> dict[str, Graph]:
    from .graphs import build_graph, build_ladder, ladder_spec

    k2 = build_graph(2, [(1, 2, 1.0)])
    path3 = build_graph(3, [(1, 2, 1.0), (2, 3, 1.0)])
    cycle4 = build_graph(4, [(1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0), (1, 4, 1.0)])
    k4 = build_graph(4, [(i, j, 1.0) for i in range(1, 5) for j in range(i + 1, 5)])
    ladder = build_ladder(ladder_spec(k2, 0, 2))
    return {"path2": k2, "path3": path3, "cycle4": cycle4, "k4": k4,
            "ladder2x3": ladder}


def pinning_shapes(n: int, epsilon: float = 0.7) -> dict[str, Pinning]:
    mixed = tuple(0.5 + (i % 3) * 0.75 if i % 4 != 3 else 0.0 for i in range(n))
    if not any(p > 0 for p in mixed):
        mixed = (1.0,) + mixed[1:]
    shapes = {
        "uniform": Pinning(pi=(1.0,) * n, epsilon=epsilon),
        "single": Pinning(pi=(1.0,) + (0.0,) * (n - 1), epsilon=epsilon),
    }
    if n > 1:
        shapes["mixed"] = Pinning(pi=mixed, epsilon=epsilon)
    return shapes


@dataclass(frozen=True)
class VerifyResult:
    identity: str
    instance: str
    lhs: float
    rhs: float
    rel_gap: float
    passed: bool

    def to_dict(self) -> dict:
        return {"identity": self.identity, "instance": self.instance,
                "lhs": self.lhs, "rhs": self.rhs, "rel_gap": self.rel_gap,
                "pass": self.passed}


def run_verification(max_vertices: int = 7, n_t: int = 20, seed: int = 1234,
                     tol: float = REL_TOL) -> list[VerifyResult]:
    """Run all three exact oracles over the bundled corpus."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    results: list[VerifyResult] = []
    for name, g in bundled_graphs().items():
        if g.n > max_vertices:
            continue
        for pname, pin in pinning_shapes(g.n).items():
            ag = augment(g, pin)
            for k in range(n_t):
                t = rng.uniform(-2.0, 2.0, size=g.n)
                inst = f"{name}/{pname}/t{k}"
                lhs, rhs = oracle_matrix_tree(ag, t)
                results.append(VerifyResult("matrix-tree", inst, lhs, rhs,
                                            rel_gap(lhs, rhs), rel_gap(lhs, rhs) <= tol))
                if g.n >= 2:
                    x, y = 1, g.n
                    lhs, rhs = oracle_minor_forest(ag, t, x, y)
                    results.append(VerifyResult("minor-forest", inst, lhs, rhs,
                                                rel_gap(lhs, rhs), rel_gap(lhs, rhs) <= tol))
                    checks = oracle_green_formula(ag, t, x, y)
                    for key, (lv, rv) in checks.items():
                        results.append(VerifyResult(f"green-{key}", inst, lv, rv,
                                                    rel_gap(lv, rv), rel_gap(lv, rv) <= tol))
    return results
