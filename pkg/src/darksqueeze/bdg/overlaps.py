"""Bi-orthogonal products, wave-packet normalisation and completeness.

Products use ``<Phi_j|Psi_l> = int (conj(u_j) u_l - conj(v_j) v_l) dsigma``
where ``Phi_j = sigma3 Psi_j``.  Integrands that tend to constants at
``sigma -> +-inf`` are split as ``c0 + c1 tanh + r`` with ``r`` decaying.  The
constant gives a delta term (zero away from coinciding wavenumbers), the tanh
part uses the principal-value transform and ``r`` is integrated by the
trapezoid rule, which is spectrally accurate for smooth decaying integrands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ..errors import QuadratureError
from .fourier import fourier_tanh
from .modes import (DEFAULT_K_FLOOR, BdGMode, branch_eps, eigenvalue_plus, nu_k, phi_zero,
                    psi_zero)
from .operator import smooth_step


def trapezoid_grid(half_width: float, count: int) -> np.ndarray:
    return np.linspace(-half_width, half_width, count)


def _trapz(values, x):
    return np.trapezoid(values, x, axis=-1) if hasattr(np, "trapezoid") else np.trapz(values, x, axis=-1)


@dataclass
class InnerProduct:
    value: complex
    tail: float
    delta_weight: complex = 0j


def inner_product(left: BdGMode, right: BdGMode, half_width: float = 40.0, count: int = 16001,
                  delta_tol: float = 1e-10) -> InnerProduct:
    """``<left|right>`` for left vector ``left`` (already a sigma3 image).

    At most one of the two modes may be a continuous mode with a
    non-decaying plane-wave factor.  For two continuous modes use
    :func:`wavepacket_orthonormality` instead.

    Raises
    ------
    QuadratureError
        When the product contains a delta term at zero wavenumber offset, or
        when the decaying remainder is not small at the integration edges.
    """
    kl = left.k if left.kind != "zero" else 0.0
    kr = right.k if right.kind != "zero" else 0.0
    kl = kl or 0.0
    kr = kr or 0.0
    if left.kind != "zero" and right.kind != "zero":
        raise QuadratureError("continuous-continuous products are distributions; "
                              "use wavepacket_orthonormality")
    q = kr - kl
    x = trapezoid_grid(half_width, count)
    h = np.conj(left.u(x)) * right.u(x) + np.conj(left.v(x)) * right.v(x)
    g = h * np.exp(-1j * q * x)
    gp, gm = g[-1], g[0]
    c0 = 0.5 * (gp + gm)
    c1 = 0.5 * (gp - gm)
    r = g - c0 - c1 * np.tanh(x)
    tail = float(max(abs(r[0]), abs(r[-1]), abs(r[1]), abs(r[-2])))
    if tail > 1e-12:
        raise QuadratureError(f"remainder not decayed at the edges (tail {tail:g})")
    value = _trapz(r * np.exp(1j * q * x), x)
    if abs(q) > 0:
        value = value + c1 * fourier_tanh(q)
        delta = 0j
    else:
        delta = c0
        if abs(c0) > delta_tol:
            raise QuadratureError(f"product contains 2 pi delta(0) with weight {c0!r}")
    return InnerProduct(complex(value), tail, complex(delta))


# ---------------------------------------------------------------- k quadrature


def gauss_legendre_panels(edges, order: int = 8):
    """Nodes and weights of composite Gauss-Legendre rules over ``edges``."""
    xg, wg = np.polynomial.legendre.leggauss(order)
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (b - a) * xg[None, :] + 0.5 * (b + a)
    weights = 0.5 * (b - a) * wg[None, :]
    return nodes.ravel(), weights.ravel()


def k_panels(k_floor: float, k_max: float, log_panels: int = 12, panel_width: float = 0.5,
             order: int = 8):
    """Positive-k nodes: log-spaced panels on [k_floor, 1], uniform beyond."""
    lo = np.geomspace(k_floor, 1.0, log_panels + 1)
    hi = np.linspace(1.0, k_max, max(2, int(math.ceil((k_max - 1.0) / panel_width)) + 1))
    edges = np.concatenate([lo, hi[1:]])
    return gauss_legendre_panels(edges, order)


def mode_arrays(gamma: float, k, x):
    """Vectorised continuous modes: arrays ``u, v`` of shape (len(k), len(x))."""
    k = np.asarray(k, dtype=float)[:, None]
    eps = branch_eps(gamma, k)
    nu = nu_k(gamma, k)
    alpha = 0.5 * (eps + k)
    beta = 0.5 * (eps - k)
    norm = 1.0 / np.sqrt(2.0 * np.pi * np.abs(k) * nu * eps ** 2)
    t = np.tanh(x)[None, :]
    phase = norm * np.exp(1j * k * x[None, :])
    return phase * (t - 1j * alpha) ** 2, phase * (t + 1j * beta) ** 2


def smooth_window(center: float, width: float, cutoff: float = 3.0) -> Callable:
    """Gaussian ``exp(-(k-c)^2 / (2 w^2))`` with a C-infinity cutoff at ``c +- cutoff w``.

    The cutoff makes the window compactly supported without a kink, so the
    corresponding wave packets decay faster than any power.
    """

    def f(k):
        k = np.asarray(k, dtype=float)
        z = (k - center) / width
        edge = smooth_step((cutoff - np.abs(z)) / 1.0)
        return np.exp(-0.5 * z * z) * edge

    f.support = (center - cutoff * width, center + cutoff * width)
    return f


@dataclass
class WavepacketResult:
    value: complex
    reference: complex

    @property
    def abs_error(self) -> float:
        return abs(self.value - self.reference)

    @property
    def rel_error(self) -> float:
        return self.abs_error / max(abs(self.reference), 1e-300)


def wavepacket(gamma: float, window: Callable, support, x, order: int = 16, panels: int = 16):
    """``int dk window(k) Psi_k(x)`` by Gauss-Legendre quadrature."""
    nodes, weights = gauss_legendre_panels(np.linspace(support[0], support[1], panels + 1), order)
    u, v = mode_arrays(gamma, nodes, x)
    c = (weights * window(nodes))[:, None]
    return np.sum(c * u, axis=0), np.sum(c * v, axis=0), nodes, weights


def wavepacket_orthonormality(gamma: float, f: Callable, h: Callable, f_support=None,
                              h_support=None, half_width: float = 200.0, count: int = 16001,
                              k_floor: float = DEFAULT_K_FLOOR) -> WavepacketResult:
    """Compare ``<Phi_f|Psi_h>`` with ``int conj(f) h dk``.

    ``Psi_h = int h(k) Psi_k dk`` and likewise for f; the sigma integral of
    the two packets is computed on a uniform grid wide enough for both to
    decay.  Agreement means the continuous modes are delta-normalised.
    """
    f_support = f_support or f.support
    h_support = h_support or h.support
    for lo, hi in (f_support, h_support):
        if lo <= k_floor and hi >= -k_floor:
            raise ValueError("k-windows must be supported away from k = 0")
    x = trapezoid_grid(half_width, count)
    fu, fv, _, _ = wavepacket(gamma, f, f_support, x)
    hu, hv, _, _ = wavepacket(gamma, h, h_support, x)
    value = _trapz(np.conj(fu) * hu - np.conj(fv) * hv, x)
    lo = max(f_support[0], h_support[0])
    hi = min(f_support[1], h_support[1])
    if hi > lo:
        nodes, weights = gauss_legendre_panels(np.linspace(lo, hi, 17), 16)
        reference = np.sum(weights * np.conj(f(nodes)) * h(nodes))
    else:
        reference = 0.0
    return WavepacketResult(complex(value), complex(reference))


# ---------------------------------------------------------------- completeness


@dataclass
class CompletenessResult:
    """Reconstruction diagnostics for one test function."""

    error: float
    error_uncorrected: float
    discrete_norm: float
    continuum_norm: float
    k_floor: float
    extra: dict = field(default_factory=dict)


@dataclass(frozen=True)
class CompletenessGrid:
    k_floor: float = DEFAULT_K_FLOOR
    k_max: float = 25.0
    log_panels: int = 12
    panel_width: float = 0.5
    order: int = 8
    proj_half_width: float = 40.0
    proj_count: int = 2001
    eval_half_width: float = 10.0
    eval_count: int = 201
    block: int = 256

    def refined(self, factor: int = 2) -> "CompletenessGrid":
        return CompletenessGrid(self.k_floor / factor, self.k_max, self.log_panels + 4,
                                self.panel_width / factor, self.order, self.proj_half_width,
                                self.proj_count, self.eval_half_width, self.eval_count, self.block)


def jordan_projection(gamma: float, F, x):
    """Components of ``F`` along ``Z = (psi, psi)`` and ``G = (i phi, -i conj(phi))``.

    Uses ``<s3 Z, G> = 2i``, ``<s3 G, Z> = -2i`` and
    ``<s3 Z, Z> = <s3 G, G> = 0``.
    """
    p = psi_zero(x)
    ph = phi_zero(gamma, x)
    z = np.vstack([p, p]).astype(complex)
    gv = np.vstack([1j * ph, -1j * np.conj(ph)])
    pz = _trapz(np.conj(z[0]) * F[0] - np.conj(z[1]) * F[1], x)
    pg = _trapz(np.conj(gv[0]) * F[0] - np.conj(gv[1]) * F[1], x)
    return pg / (-2j), pz / (2j)


def _continuum_density(gamma, k, x_proj, F, x_eval):
    """Integrand in k of the continuum reconstruction, shape (len(k), 2, len(x_eval))."""
    u, v = mode_arrays(gamma, k, x_proj)
    a = _trapz(np.conj(u) * F[0][None, :] - np.conj(v) * F[1][None, :], x_proj)
    b = _trapz(v * F[0][None, :] - u * F[1][None, :], x_proj)
    ue, ve = mode_arrays(gamma, k, x_eval)
    top = a[:, None] * ue - b[:, None] * np.conj(ve)
    bot = a[:, None] * ve - b[:, None] * np.conj(ue)
    return np.stack([top, bot], axis=1)


def reconstruct(gamma: float, func: Callable, grid: CompletenessGrid = CompletenessGrid()):
    """Rebuild ``func`` from its bi-orthogonal components.

    The continuum part sums each positive-norm mode ``Psi_k`` and its
    negative-norm conjugate partner ``(conj v_k, conj u_k)`` over k of both
    signs, excluding ``(-k_floor, k_floor)``.  The excluded window is
    restored from the one-sided limits of the k-integrand at ``+-k_floor``
    (half contributions from each side of the k = 0 pole).  The discrete
    part is the projector onto the zero-mode Jordan pair.

    Returns
    -------
    x_eval, F_eval, discrete, continuum, window
        Arrays of shape (2, n_eval) except ``x_eval``.
    """
    xp = trapezoid_grid(grid.proj_half_width, grid.proj_count)
    xe = trapezoid_grid(grid.eval_half_width, grid.eval_count)
    F = np.asarray(func(xp), dtype=complex)
    Fe = np.asarray(func(xe), dtype=complex)
    cz, cg = jordan_projection(gamma, F, xp)
    p = psi_zero(xe)
    ph = phi_zero(gamma, xe)
    discrete = cz * np.vstack([p, p]) + cg * np.vstack([1j * ph, -1j * np.conj(ph)])
    kp, wp = k_panels(grid.k_floor, grid.k_max, grid.log_panels, grid.panel_width, grid.order)
    nodes = np.concatenate([-kp[::-1], kp])
    weights = np.concatenate([wp[::-1], wp])
    cont = np.zeros((2, xe.size), dtype=complex)
    for start in range(0, nodes.size, grid.block):
        sl = slice(start, start + grid.block)
        dens = _continuum_density(gamma, nodes[sl], xp, F, xe)
        cont += np.tensordot(weights[sl], dens, axes=(0, 0))
    edge = grid.k_floor * (1.0 + 1e-12)
    dens0 = _continuum_density(gamma, np.array([-edge, edge]), xp, F, xe)
    window = grid.k_floor * (dens0[0] + dens0[1])
    return xe, Fe, discrete, cont, window


def completeness_check(gamma: float, test_functions: Sequence[Callable],
                       grid: CompletenessGrid = CompletenessGrid()) -> list:
    """Relative sup-norm reconstruction error for each test function.

    Each callable maps sigma (1-D array) to a (2, n) complex array.
    """
    out = []
    for func in test_functions:
        xe, Fe, disc, cont, window = reconstruct(gamma, func, grid)
        scale = np.max(np.abs(Fe))
        rec = disc + cont + window
        out.append(CompletenessResult(
            error=float(np.max(np.abs(rec - Fe)) / scale),
            error_uncorrected=float(np.max(np.abs(disc + cont - Fe)) / scale),
            discrete_norm=float(np.max(np.abs(disc)) / scale),
            continuum_norm=float(np.max(np.abs(cont)) / scale),
            k_floor=grid.k_floor))
    return out


def continuum_projections(gamma: float, func: Callable, ks, half_width: float = 40.0,
                          count: int = 4001):
    """``<Phi_k|f>`` and the partner projection for each k."""
    x = trapezoid_grid(half_width, count)
    F = np.asarray(func(x), dtype=complex)
    u, v = mode_arrays(gamma, np.asarray(ks, float), x)
    a = _trapz(np.conj(u) * F[0][None, :] - np.conj(v) * F[1][None, :], x)
    b = _trapz(v * F[0][None, :] - u * F[1][None, :], x)
    return a, b


def zero_continuum_products(gamma: float, zero_pair, ks, **kw):
    """``<Phi_1|Psi_k>`` for each k in ``ks``."""
    from .modes import continuous_mode

    left = zero_pair.left
    return [inner_product(left, continuous_mode(gamma, k).right, **kw).value for k in ks]
