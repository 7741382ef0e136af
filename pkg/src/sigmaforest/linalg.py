"""Dense symmetric linear algebra for the pinned weighted Laplacian.

Conductances beta_ij * e^{t_i+t_j} are assembled from exponentials of
sums; beyond |t_i+t_j| > 700 (natural log units) we fail loudly instead
of producing inf.  All determinants go through a Cholesky factorization:
A(t) + eps_hat(t) is positive definite on a connected graph with at least
one positive pinning strength, so a factorization failure indicates
overflow or invalid input, not math.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .graphs import Graph, Pinning

MAX_LOG_CONDUCTANCE = 700.0


class NumericalError(RuntimeError):
    """Overflow or loss of precision in conductance assembly."""


class FactorizationError(NumericalError):
    """The pinned Laplacian failed its positive-definite factorization."""


def _check_dim(g: Graph, t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if t.shape != (g.n,):
        raise ValueError(f"t has shape {t.shape}, expected ({g.n},)")
    return t


def conductances(g: Graph, t: np.ndarray) -> np.ndarray:
    """Edge conductances beta_ij e^{t_i+t_j}, in edge order."""
    t = _check_dim(g, t)
    ei, ej, w = g.edge_arrays
    log_c = t[ei] + t[ej]
    if log_c.size and np.max(np.abs(log_c)) > MAX_LOG_CONDUCTANCE:
        raise NumericalError("conductance exponent beyond representable range")
    return w * np.exp(log_c)


def laplacian(g: Graph, t: np.ndarray) -> np.ndarray:
    """Weighted Laplacian A(t): off-diagonal -beta_ij e^{t_i+t_j}, zero column sums."""
    t = _check_dim(g, t)
    ei, ej, _ = g.edge_arrays
    c = conductances(g, t)
    a = np.zeros((g.n, g.n))
    a[ei, ej] = -c
    a[ej, ei] = -c
    d = np.zeros(g.n)
    np.add.at(d, ei, c)
    np.add.at(d, ej, c)
    a[np.diag_indices(g.n)] = d
    return a


def pinning_diagonal(p: Pinning, t: np.ndarray) -> np.ndarray:
    """Diagonal entries eps_i e^{t_i} of eps_hat(t), as a vector."""
    t = np.asarray(t, dtype=float)
    if t.shape != (len(p.pi),):
        raise ValueError("t dimension does not match pinning")
    if t.size and np.max(np.abs(t[p.eps > 0])) > MAX_LOG_CONDUCTANCE:
        raise NumericalError("pinning exponent beyond representable range")
    return p.eps * np.exp(t)


def pinned_matrix(g: Graph, p: Pinning, t: np.ndarray) -> np.ndarray:
    """A(t) + eps_hat(t)."""
    if len(p.pi) != g.n:
        raise ValueError("pinning dimension does not match vertex count")
    m = laplacian(g, t)
    m[np.diag_indices(g.n)] += pinning_diagonal(p, t)
    return m


def _cholesky(m: np.ndarray) -> np.ndarray:
    try:
        low = np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        # Diagnostic only: report how far from PD the matrix is.
        lam_min = float(np.linalg.eigvalsh(m)[0])
        raise FactorizationError(
            f"pinned Laplacian not positive definite (min eigenvalue {lam_min:.3e})"
        ) from None
    if np.min(np.diag(low)) < 1e-12:
        lam_min = float(np.linalg.eigvalsh(m)[0])
        raise FactorizationError(
            f"Cholesky pivot below 1e-12 (min eigenvalue {lam_min:.3e})")
    return low


def logdet_pinned(g: Graph, p: Pinning, t: np.ndarray) -> float:
    """log det(A(t) + eps_hat(t)) via Cholesky."""
    low = _cholesky(pinned_matrix(g, p, t))
    return 2.0 * float(np.sum(np.log(np.diag(low))))


def green_entry(g: Graph, p: Pinning, t: np.ndarray, x: int, y: int) -> float:
    """Green's function e^{t_x+t_y} (A(t)+eps_hat(t))^{-1}_{xy} for x != y.

    Uses a Cholesky solve with one iterative refinement step, never a
    full inverse.
    """
    if x == y:
        raise ValueError("green_entry requires two different vertices")
    if not (1 <= x <= g.n and 1 <= y <= g.n):
        raise ValueError("vertex out of range")
    t = _check_dim(g, t)
    m = pinned_matrix(g, p, t)
    low = _cholesky(m)
    b = np.zeros(g.n)
    b[y - 1] = 1.0
    u = scipy.linalg.cho_solve((low, True), b)
    u += scipy.linalg.cho_solve((low, True), b - m @ u)
    return float(np.exp(t[x - 1] + t[y - 1]) * u[x - 1])


def signed_minor_det(m: np.ndarray, x: int, y: int) -> float:
    """(-1)^{x+y} det of m with row y and column x removed (1-based labels)."""
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    if m.shape != (n, n) or n < 2:
        raise ValueError("need a square matrix of dimension >= 2")
    if not (1 <= x <= n and 1 <= y <= n):
        raise ValueError("index out of range")
    minor = np.delete(np.delete(m, y - 1, axis=0), x - 1, axis=1)
    return float((-1.0) ** (x + y) * np.linalg.det(minor))
