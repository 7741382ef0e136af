"""Observables and their Monte Carlo estimators.

Two routes to the same quantities coexist on purpose: per-draw values
exact in t (matrix solve, or exact tree-law expectations on enumerable
instances) and plain indicator averages over sampled trees.  The exact
route has lower variance; the indicator route is kept as a built-in
cross-check of the conditional-expectation identity.

Standard errors are IACT-corrected batch means, since MCMC draws are
correlated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forests import SpanningTree, connected_in_forest, tree_law
from .graphs import AugmentedGraph
from .linalg import green_entry
from .mcmc import SampleBatch, autocorrelation_time


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_error: float
    n_effective: float

    def __post_init__(self):
        if self.std_error < 0:
            raise ValueError("std_error must be nonnegative")


def batch_mean_se(values: np.ndarray) -> Estimate:
    """Mean with IACT-corrected standard error."""
    x = np.asarray(values, dtype=float)
    n = x.size
    tau = autocorrelation_time(x)
    se = float(np.std(x) * np.sqrt(tau / n))
    return Estimate(mean=float(np.mean(x)), std_error=se, n_effective=n / tau)


def obs_q(t: np.ndarray, tree: SpanningTree, x: int, y: int, pi) -> float:
    """Q = e^{t_x+t_y} / (pi_x e^{t_x} + pi_y e^{t_y}) on the event
    {x is a root and x <-> y in the forest}, else 0."""
    pi = np.asarray(pi, dtype=float)
    if x == y:
        raise ValueError("obs_q requires two different vertices")
    if pi[x - 1] <= 0 or pi[y - 1] <= 0:
        raise ValueError("obs_q requires pi_x, pi_y > 0")
    if x not in tree.roots or not connected_in_forest(tree, x, y):
        return 0.0
    return _q_ratio(t, x, y, pi)


def _q_ratio(t: np.ndarray, x: int, y: int, pi: np.ndarray) -> float:
    tx, ty = t[x - 1], t[y - 1]
    # e^{tx+ty} / (pi_x e^tx + pi_y e^ty), computed shift-stably.
    m = max(tx, ty)
    return float(np.exp(tx + ty - m) / (pi[x - 1] * np.exp(tx - m) + pi[y - 1] * np.exp(ty - m)))


def green_conditional(ag: AugmentedGraph, t: np.ndarray, x: int, y: int) -> float:
    """Green's function via the exact tree law:
    e^{t_x+t_y}/(eps_x e^{t_x} + eps_y e^{t_y}) * P(x or y roots the
    component containing both)."""
    eps = ag.eps
    if eps[x - 1] + eps[y - 1] <= 0:
        raise ValueError("need eps_x + eps_y > 0")
    t = np.asarray(t, dtype=float)
    law = tree_law(ag, t)
    p = law.event_prob(
        lambda tr: connected_in_forest(tr, x, y) and (x in tr.roots or y in tr.roots))
    tx, ty = t[x - 1], t[y - 1]
    m = max(tx, ty)
    ratio = float(np.exp(tx + ty - m)
                  / (eps[x - 1] * np.exp(tx - m) + eps[y - 1] * np.exp(ty - m)))
    return ratio * p


def cond_q_parts(ag: AugmentedGraph, t: np.ndarray, x: int, y: int,
                 pi) -> tuple[float, float]:
    """Exact conditional expectations given t of the one-root and multi-root
    parts of Q (Rao-Blackwellized over T via the enumerated tree law)."""
    pi = np.asarray(pi, dtype=float)
    t = np.asarray(t, dtype=float)
    law = tree_law(ag, t)
    p_one = law.event_prob(
        lambda tr: tr.roots == frozenset({x}) and connected_in_forest(tr, x, y))
    p_multi = law.event_prob(
        lambda tr: x in tr.roots and len(tr.roots) > 1 and connected_in_forest(tr, x, y))
    ratio = _q_ratio(t, x, y, pi)
    return ratio * p_one, ratio * p_multi


def estimate_ward(batch: SampleBatch, y: int) -> Estimate:
    """Estimate of E[e^{t_y}]; theory value 1 for every pinning."""
    if len(batch) == 0:
        raise ValueError("empty batch")
    return batch_mean_se(np.exp(batch.t[:, y - 1]))


def estimate_eps_green(batch: SampleBatch, ag: AugmentedGraph, x: int, y: int,
                       check_sigma: float = 3.0) -> Estimate:
    """Estimate of epsilon * E[G_xy], matrix route, cross-checked against the
    indicator route (Q_xy + Q_yx over sampled trees).

    Raises if the two estimators disagree beyond check_sigma paired
    standard errors: that flags a sampler or formula bug.
    """
    pi = ag.pinning.pi_array
    if x == y or pi[x - 1] <= 0 or pi[y - 1] <= 0:
        raise ValueError("need x != y with pi_x, pi_y > 0")
    eps_scalar = ag.pinning.epsilon
    g = ag.graph
    a = np.array([eps_scalar * green_entry(g, ag.pinning, batch.t[k], x, y)
                  for k in range(len(batch))])
    b = np.array([obs_q(batch.t[k], batch.trees[k], x, y, pi)
                  + obs_q(batch.t[k], batch.trees[k], y, x, pi)
                  for k in range(len(batch))])
    diff = batch_mean_se(a - b)
    tol = check_sigma * diff.std_error + 1e-12
    if abs(diff.mean) > tol:
        raise AssertionError(
            f"eps*G estimators disagree: paired diff {diff.mean:.4g} "
            f"exceeds {check_sigma} SE ({diff.std_error:.4g})")
    return batch_mean_se(a)


def root_decomposition(batch: SampleBatch, x: int, y: int, pi
                       ) -> tuple[Estimate, Estimate]:
    """Estimates of E[Q 1_{R={x}}] and E[Q 1_{|R|>1}] from sampled trees.

    Per draw the two parts add up to Q exactly (indicator partition).
    """
    pi = np.asarray(pi, dtype=float)
    one = np.empty(len(batch))
    multi = np.empty(len(batch))
    for k in range(len(batch)):
        q = obs_q(batch.t[k], batch.trees[k], x, y, pi)
        if batch.trees[k].roots == frozenset({x}):
            one[k], multi[k] = q, 0.0
        else:
            one[k], multi[k] = 0.0, q
    return batch_mean_se(one), batch_mean_se(multi)
