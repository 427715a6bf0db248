"""Closed-form continuous and zero modes of the fluctuation operator.

Continuous modes
----------------
For wavenumber k let ``nu = sqrt(k^2 + 4 (1 + gamma^2))`` and
``eps = sign(k) nu - 2 gamma``.  With ``alpha = (eps + k)/2`` and
``beta = (eps - k)/2`` the pair::

    u_k = n_k e^{ik sigma} (tanh(sigma) - i alpha)^2
    v_k = n_k e^{ik sigma} (tanh(sigma) + i beta)^2

solves ``L (u_k, v_k) = E_k (u_k, v_k)`` with ``E_k = k eps = |k| nu - 2 gamma k``.
``n_k = 1 / sqrt(2 pi |k| nu eps^2)`` gives ``<Phi_k'|Psi_k> = delta(k - k')``.
For k > 0 this reproduces the usual positive-branch formula in which the
``(D + k)/2`` factor multiplies ``u``; the two components are often printed
the other way round, which does not satisfy the eigen-equation.

Zero mode
---------
``Z = (psi, psi)`` with ``psi = sech^2`` is the translation mode, ``L Z = 0``.
``G = (i phi, -i conj(phi))`` with ``phi = (1 + i gamma (tanh + sigma sech^2)) / 2``
is its partner in a Jordan chain, ``L G = -i Z``.  The conventional zero-mode
vector ``(u1, v1) = ((psi + phi)/sqrt(2), (psi - conj(phi))/sqrt(2))`` equals
``(Z - i G)/sqrt(2)``; it is bi-orthogonal to every continuous mode but is
not itself annihilated by L.  The tanh (not tan) reading of phi is used
throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..errors import KFloorError

DEFAULT_K_FLOOR = 1e-3


def nu_k(gamma: float, k):
    return np.sqrt(np.asarray(k, dtype=float) ** 2 + 4.0 * (1.0 + gamma ** 2))


def branch_eps(gamma: float, k):
    """``sign(k) nu(k) - 2 gamma``; for k > 0 this is ``D_+``."""
    k = np.asarray(k, dtype=float)
    return np.where(k >= 0, 1.0, -1.0) * nu_k(gamma, k) - 2.0 * gamma


def eigenvalue_plus(gamma: float, k):
    """Positive-branch excitation energy ``|k| nu(k) - 2 gamma k``.

    Positive for every k != 0 and gamma >= 0.  For k > 0 this equals
    ``|k| (-2 gamma + nu)``; it is even in k only when gamma = 0.
    """
    k = np.asarray(k, dtype=float)
    out = np.abs(k) * nu_k(gamma, k) - 2.0 * gamma * k
    return out[()] if out.ndim == 0 else out


def eigenvalue_minus(gamma: float, k):
    """Negative-energy partner ``-|k| nu(k) - 2 gamma k`` (unbounded below).

    For k > 0 this equals ``|k| (-2 gamma - nu)``.  Only used to show the
    branch has no lower bound.
    """
    k = np.asarray(k, dtype=float)
    out = -np.abs(k) * nu_k(gamma, k) - 2.0 * gamma * k
    return out[()] if out.ndim == 0 else out


def minus_branch_bound(gamma: float, M: float) -> float:
    """A wavenumber beyond which ``eigenvalue_minus < -M`` for all larger k > 0.

    For k > 0 the minus-branch energy is below ``-k^2``, so ``sqrt(M)`` works.
    """
    return math.sqrt(M)


@dataclass(frozen=True)
class BdGMode:
    """A right eigenvector ``|Psi> = (u, v)``.

    Attributes
    ----------
    kind : {"continuous", "zero"}
    k : float or None
        Wavenumber for continuous modes.
    eigenvalue : float
    u, v : callable
        Vectorised evaluators over sigma.
    branch : str
        "plus" for continuous modes.
    """

    kind: str
    eigenvalue: float
    u: Callable
    v: Callable
    k: Optional[float] = None
    branch: str = "plus"

    def __call__(self, sigma):
        return np.vstack([self.u(sigma), self.v(sigma)]).astype(complex)


@dataclass(frozen=True)
class DualPair:
    """Right vector and its sigma3 image, the left vector ``(u, -v)``."""

    right: BdGMode

    @property
    def left(self) -> BdGMode:
        r = self.right
        return BdGMode(kind=r.kind, eigenvalue=r.eigenvalue, u=r.u,
                       v=lambda x, _v=r.v: -_v(x), k=r.k, branch=r.branch)

    @property
    def kind(self):
        return self.right.kind

    @property
    def k(self):
        return self.right.k

    @property
    def eigenvalue(self):
        return self.right.eigenvalue


def mode_coefficients(gamma: float, k: float):
    """Return ``(norm, alpha, beta, eps)`` for the continuous mode at k."""
    eps = float(branch_eps(gamma, k))
    nu = float(nu_k(gamma, k))
    alpha = 0.5 * (eps + k)
    beta = 0.5 * (eps - k)
    norm = 1.0 / math.sqrt(2.0 * math.pi * abs(k) * nu * eps ** 2)
    return norm, alpha, beta, eps


def continuous_mode(gamma: float, k: float, k_floor: float = DEFAULT_K_FLOOR) -> DualPair:
    """Continuous eigenmode at wavenumber k (either sign).

    Raises
    ------
    KFloorError
        If ``|k| <= k_floor``.
    """
    if not abs(k) > k_floor:
        raise KFloorError(f"|k| = {abs(k)!r} is inside the excluded window (-{k_floor}, {k_floor})")
    norm, alpha, beta, _ = mode_coefficients(gamma, k)

    def u(x):
        x = np.asarray(x, dtype=float)
        return norm * np.exp(1j * k * x) * (np.tanh(x) - 1j * alpha) ** 2

    def v(x):
        x = np.asarray(x, dtype=float)
        return norm * np.exp(1j * k * x) * (np.tanh(x) + 1j * beta) ** 2

    mode = BdGMode(kind="continuous", eigenvalue=float(eigenvalue_plus(gamma, k)),
                   u=u, v=v, k=float(k))
    return DualPair(mode)


def partner_mode(pair: DualPair) -> BdGMode:
    """Conjugate partner ``(conj v, conj u)``: eigenvalue ``-E``, negative norm."""
    r = pair.right
    return BdGMode(kind="partner", eigenvalue=-r.eigenvalue,
                   u=lambda x: np.conj(r.v(x)), v=lambda x: np.conj(r.u(x)), k=r.k,
                   branch="minus")


def psi_zero(x):
    return 1.0 / np.cosh(np.asarray(x, dtype=float)) ** 2


def phi_zero(gamma: float, x):
    x = np.asarray(x, dtype=float)
    sech2 = 1.0 / np.cosh(x) ** 2
    return 0.5 * (1.0 + 1j * gamma * (np.tanh(x) + x * sech2))


@dataclass(frozen=True)
class ZeroMode:
    """Zero-mode data with the normalised and printed scalings.

    ``pair`` holds ``(u1, v1)`` scaled by ``scale`` relative to
    ``((psi + phi), (psi - conj(phi)))/sqrt(2)``.  ``scale = 1/sqrt(2)``
    gives ``<Phi1|Psi1> = 1``; ``scale = 1`` is the printed
    ``1/(2 sqrt 2)`` convention with ``<Phi1|Psi1> = 2``.
    """

    gamma: float
    scale: float
    pair: DualPair

    def psi(self, x):
        return self.scale * psi_zero(x)

    def phi(self, x):
        return self.scale * phi_zero(self.gamma, x)

    def translation(self, x):
        """``Z = (psi, psi)`` (unscaled)."""
        p = psi_zero(x)
        return np.vstack([p, p]).astype(complex)

    def generalized(self, x):
        """``G = (i phi, -i conj(phi))`` (unscaled), ``L G = -i Z``."""
        f = phi_zero(self.gamma, x)
        return np.vstack([1j * f, -1j * np.conj(f)])


RAW_ZERO_NORM = 2.0
"""``<Phi1|Psi1>`` under the printed prefactor, computed analytically."""


def zero_mode(gamma: float, normalized: bool = True) -> ZeroMode:
    """Zero-mode pair ``u1, v1`` with the tanh reading.

    ``u1 ∝ 2 sech^2 + i gamma (tanh + sigma sech^2) + 1`` and
    ``v1 ∝ 2 sech^2 + i gamma (tanh + sigma sech^2) - 1``.
    """
    scale = 1.0 / math.sqrt(2.0) if normalized else 1.0
    c = scale / math.sqrt(2.0)

    def u(x):
        return c * (psi_zero(x) + phi_zero(gamma, x))

    def v(x):
        return c * (psi_zero(x) - np.conj(phi_zero(gamma, x)))

    mode = BdGMode(kind="zero", eigenvalue=0.0, u=u, v=v)
    return ZeroMode(gamma=gamma, scale=scale, pair=DualPair(mode))
