"""Densities of the field measure and exact conditional draws of s.

The joint measure on (t, s, T) has density

    prod_j e^{-t_j}/(2 pi) * prod_{E} e^{-beta_ij (B_ij - 1)}
    * prod_V e^{-eps_i (B_i_rho - 1)} * prod_{e in T} beta_e(t)

with B_ij = cosh(t_i - t_j) + (s_i - s_j)^2 e^{t_i + t_j} / 2 and
t_rho = s_rho = 0.  Summing out T via the matrix-tree identity gives the
(t, s)-marginal; integrating the Gaussian s-block (precision A(t) +
eps_hat(t)) gives the t-marginal.  The half-logdet exponent of the
t-marginal is a derived quantity and is pinned down by quadrature tests,
not trusted.

All densities are returned in log scale; there is no linear-scale API.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .graphs import AugmentedGraph
from .linalg import MAX_LOG_CONDUCTANCE, NumericalError, logdet_pinned, pinned_matrix

LOG_2PI = float(np.log(2.0 * np.pi))


def b_factor(t_i: float, t_j: float, s_i: float, s_j: float) -> float:
    """B_ij = cosh(t_i - t_j) + (s_i - s_j)^2 e^{t_i + t_j} / 2.

    For a rho-edge pass (t_j, s_j) = (0, 0).
    """
    if abs(t_i - t_j) > MAX_LOG_CONDUCTANCE or abs(t_i + t_j) > MAX_LOG_CONDUCTANCE:
        raise NumericalError("b_factor argument beyond exp range")
    return float(np.cosh(t_i - t_j) + 0.5 * (s_i - s_j) ** 2 * np.exp(t_i + t_j))


def _field_args(ag: AugmentedGraph, t, s=None):
    t = np.asarray(t, dtype=float)
    if t.shape != (ag.n,):
        raise ValueError(f"t has shape {t.shape}, expected ({ag.n},)")
    if s is None:
        return t, None
    s = np.asarray(s, dtype=float)
    if s.shape != (ag.n,):
        raise ValueError(f"s has shape {s.shape}, expected ({ag.n},)")
    return t, s


def interaction_terms(ag: AugmentedGraph, t: np.ndarray, s: np.ndarray) -> float:
    """-sum_E beta_ij (B_ij - 1) - sum_V eps_i (B_i_rho - 1)."""
    ei, ej, w = ag.graph.edge_arrays
    dt = t[ei] - t[ej]
    st = t[ei] + t[ej]
    if st.size and np.max(np.abs(np.concatenate([dt, st]))) > MAX_LOG_CONDUCTANCE:
        raise NumericalError("edge exponent beyond exp range")
    edge = np.sum(w * (np.cosh(dt) - 1.0 + 0.5 * (s[ei] - s[ej]) ** 2 * np.exp(st)))
    pin = np.sum(ag.eps * (np.cosh(t) - 1.0 + 0.5 * s ** 2 * np.exp(t)))
    return float(-edge - pin)


def log_density_ts(ag: AugmentedGraph, t, s) -> float:
    """Log of the (t, s)-marginal density (tree sum replaced by the determinant)."""
    t, s = _field_args(ag, t, s)
    site = float(-np.sum(t)) - ag.n * LOG_2PI
    return site + interaction_terms(ag, t, s) + logdet_pinned(ag.graph, ag.pinning, t)


def log_density_t(ag: AugmentedGraph, t) -> float:
    """Log of the t-marginal density (Gaussian s-block integrated out).

    Derived formula, validated against (t, s) quadrature in the test
    suite before use.
    """
    t, _ = _field_args(ag, t)
    ei, ej, w = ag.graph.edge_arrays
    dt = t[ei] - t[ej]
    if dt.size and np.max(np.abs(dt)) > MAX_LOG_CONDUCTANCE:
        raise NumericalError("edge exponent beyond exp range")
    edge = float(np.sum(w * (np.cosh(dt) - 1.0)))
    pin = float(np.sum(ag.eps * (np.cosh(t) - 1.0)))
    return (float(-np.sum(t)) - 0.5 * ag.n * LOG_2PI - edge - pin
            + 0.5 * logdet_pinned(ag.graph, ag.pinning, t))


def sample_s_given_t(ag: AugmentedGraph, t, rng: np.random.Generator) -> np.ndarray:
    """Exact draw of s given t: centered Gaussian with precision A(t) + eps_hat(t)."""
    t, _ = _field_args(ag, t)
    m = pinned_matrix(ag.graph, ag.pinning, t)
    low = np.linalg.cholesky(m)
    z = rng.standard_normal(ag.n)
    # L L^T s-cov^{-1}:  solving L^T s = z gives cov (L L^T)^{-1}.
    return scipy.linalg.solve_triangular(low, z, lower=True, trans="T")


def single_site_log_density_ts(eps_x: float, t_x: float, s_x: float) -> float:
    """Joint (t_x, s_x) density under pinning at the single vertex x.

    eps_x/(2 pi) * exp[-eps_x (cosh t_x - 1 + s_x^2 e^{t_x} / 2)],
    independent of the rest of the graph.
    """
    return float(np.log(eps_x) - LOG_2PI
                 - eps_x * (np.cosh(t_x) - 1.0 + 0.5 * s_x ** 2 * np.exp(t_x)))


def single_site_log_density_t(eps_x: float, t_x) -> np.ndarray | float:
    """t_x marginal under single pinning: sqrt(eps/2 pi) e^{-t/2} e^{-eps(cosh t - 1)}."""
    t_x = np.asarray(t_x, dtype=float)
    out = 0.5 * (np.log(eps_x) - LOG_2PI) - 0.5 * t_x - eps_x * (np.cosh(t_x) - 1.0)
    return out if out.ndim else float(out)


def single_site_t_cdf(eps_x: float, n_grid: int = 200001):
    """Numerical CDF of the single-site t marginal, as a callable for KS tests.

    The grid covers the superexponentially-decaying support with margin;
    trapezoid integration at this resolution is far below KS resolution.
    """
    half_width = float(np.arccosh(1.0 + 800.0 / eps_x)) + 2.0
    grid = np.linspace(-half_width, half_width, n_grid)
    logpdf = single_site_log_density_t(eps_x, grid)
    pdf = np.exp(logpdf - np.max(logpdf))
    cdf = np.concatenate([[0.0], np.cumsum((pdf[1:] + pdf[:-1]) * 0.5 * np.diff(grid))])
    cdf /= cdf[-1]

    def fn(x):
        return np.interp(np.asarray(x, dtype=float), grid, cdf, left=0.0, right=1.0)

    return fn
