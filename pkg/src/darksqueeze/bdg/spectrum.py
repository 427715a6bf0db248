"""Dense discretisation of the fluctuation operator for zero-mode counting.

Chebyshev collocation on ``[-L, L]`` with homogeneous Dirichlet conditions.
On this grid the translation mode survives with an eigenvalue at rounding
level while the Jordan partner, which tends to a constant, is only
approximately representable.  The Jordan block therefore splits into two
eigenvalues of order 1e-7 whose eigenvectors are numerically parallel.  The
count of independent near-zero eigenvectors (the geometric multiplicity) is
the number of zero modes; the algebraic count is reported alongside.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla


def chebyshev_matrix(n: int):
    """Differentiation matrix and nodes on [-1, 1] (n + 1 points)."""
    x = np.cos(np.pi * np.arange(n + 1) / n)
    c = np.hstack([2.0, np.ones(n - 1), 2.0]) * (-1.0) ** np.arange(n + 1)
    X = np.tile(x, (n + 1, 1)).T
    dX = X - X.T
    D = np.outer(c, 1.0 / c) / (dX + np.eye(n + 1))
    D -= np.diag(D.sum(axis=1))
    return D, x


def dense_operator(gamma: float, half_width: float = 16.0, n: int = 240):
    """Collocation matrix of size ``2 (n - 1)`` and its interior nodes."""
    D, x = chebyshev_matrix(n)
    x = half_width * x
    D = D / half_width
    D2 = D @ D
    D, D2, x = D[1:-1, 1:-1], D2[1:-1, 1:-1], x[1:-1]
    t = np.tanh(x)
    nn = (t + 1j * gamma) ** 2
    M = -D2 + np.diag(4.0 * t ** 2 - 2.0 + 2.0 * gamma ** 2)
    A = np.block([[M + 2j * gamma * D, np.diag(2.0 * nn)],
                  [np.diag(-2.0 * np.conj(nn)), -M + 2j * gamma * D]])
    return A, x


@dataclass
class ZeroModeCount:
    gamma: float
    independent: int
    algebraic: int
    smallest: np.ndarray
    min_singular: float
    tol: float


def count_zero_modes(gamma: float, tol: float = 1e-4, half_width: float = 16.0,
                     n: int = 240, rank_tol: float = 1e-3) -> ZeroModeCount:
    """Count eigenpairs with ``|E| < tol``.

    Independent eigenvectors are counted by the numerical rank (relative
    threshold ``rank_tol``) of the unit-normalised eigenvectors of all
    eigenvalues inside the tolerance disc.
    """
    A, _ = dense_operator(gamma, half_width, n)
    vals, vecs = sla.eig(A)
    order = np.argsort(np.abs(vals))
    vals, vecs = vals[order], vecs[:, order]
    near = np.abs(vals) < tol
    if near.any():
        V = vecs[:, near]
        V = V / np.linalg.norm(V, axis=0)
        sv = np.linalg.svd(V, compute_uv=False)
        independent = int(np.sum(sv > rank_tol * sv[0]))
    else:
        independent = 0
    min_sv = float(sla.svdvals(A).min())
    return ZeroModeCount(gamma=gamma, independent=independent, algebraic=int(near.sum()),
                         smallest=vals[:4], min_singular=min_sv, tol=tol)
