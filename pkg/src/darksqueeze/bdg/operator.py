"""Fluctuation operator about the grey soliton and its adjoint.

With ``t = tanh(sigma)`` and ``gamma = tan(theta)`` the operator acting on
``(u, v)`` is::

    L = [[ M + 2i gamma d,        2 N          ],
         [ -2 conj(N),     -M + 2i gamma d     ]]

    M = -d^2 + 4 t^2 - 2 + 2 gamma^2,   N = (t + i gamma)^2

and ``L^dagger = sigma3 L sigma3``.  Derivatives are spectral on a periodic
grid, so inputs must be smooth and periodic over the window, which in
practice means decaying or tapered near the edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, ResolutionError

SIGMA3 = np.diag([1.0, -1.0])

TAIL_FRACTION = 0.1
"""Share of the highest wavenumbers inspected by the resolution check."""


@dataclass(frozen=True)
class SigmaGrid:
    """Uniform cell-centred grid on ``[-half_width, half_width)``.

    Points sit at ``-L + h (j + 1/2)`` so the grid is symmetric about 0 and
    periodic with period ``2L``.
    """

    half_width: float = 40.0
    count: int = 2048

    def __post_init__(self):
        if self.count < 8 or self.count & (self.count - 1):
            raise ConfigError(f"grid count must be a power of two, got {self.count}", "count")
        if not self.half_width > 0:
            raise ConfigError("grid half_width must be positive", "half_width")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.count

    @property
    def points(self) -> np.ndarray:
        h = self.spacing
        return -self.half_width + h * (np.arange(self.count) + 0.5)

    @property
    def wavenumbers(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.count, d=self.spacing)

    def interior(self, fraction: float = 0.8) -> np.ndarray:
        return np.abs(self.points) <= fraction * self.half_width


@dataclass(frozen=True)
class BdGContext:
    """Operator parameters: gamma, the rate prefactor and the sigma grid."""

    gamma: float = 0.0
    prefactor: float = 1.0
    grid: SigmaGrid = SigmaGrid()

    def __post_init__(self):
        if not (self.gamma >= 0 and np.isfinite(self.gamma)):
            raise ConfigError("gamma must be finite and >= 0", "gamma")

    @classmethod
    def from_soliton(cls, p, grid: SigmaGrid = SigmaGrid()) -> "BdGContext":
        return cls(gamma=p.gamma, prefactor=p.prefactor, grid=grid)


def spectral_derivative(f, grid: SigmaGrid, order: int = 1, check: bool = True):
    """FFT derivative of ``f`` along its last axis.

    Raises
    ------
    ResolutionError
        When the top ``TAIL_FRACTION`` of the spectrum carries more than 1e-6
        of the norm of ``f``.
    """
    fk = np.fft.fft(f, axis=-1)
    q = grid.wavenumbers
    if check:
        cut = np.abs(q) >= (1.0 - TAIL_FRACTION) * np.abs(q).max()
        total = np.linalg.norm(fk)
        if total > 0 and np.linalg.norm(fk[..., cut]) > 1e-6 * total:
            raise ResolutionError("spectral tail exceeds 1e-6 of the norm; refine the sigma grid "
                                  "or taper the function")
    mult = (1j * q) ** order
    if order % 2:
        mult[grid.count // 2] = 0.0  # drop the unpaired Nyquist mode
    return np.fft.ifft(mult * fk, axis=-1)


def potential_terms(gamma: float, sigma):
    t = np.tanh(sigma)
    m0 = 4.0 * t ** 2 - 2.0 + 2.0 * gamma ** 2
    n = (t + 1j * gamma) ** 2
    return m0, n


def apply_L(ctx: BdGContext, f, adjoint: bool = False, check: bool = True, sigma=None):
    """Apply the operator (or its adjoint) to a sampled pair.

    Parameters
    ----------
    ctx : BdGContext
    f : ndarray, shape (2, n)
        Samples of ``(u, v)`` on ``ctx.grid``.
    adjoint : bool
        Apply ``L^dagger`` instead, built from the explicit adjoint entries.
    check : bool
        Run the spectral resolution check.
    sigma : ndarray, optional
        Coefficient abscissae; defaults to the grid points.  Supplying a
        shifted copy lets callers place the soliton elsewhere in the box.
    """
    f = np.asarray(f, dtype=complex)
    if f.shape != (2, ctx.grid.count):
        raise ValueError(f"expected shape (2, {ctx.grid.count}), got {f.shape}")
    gam = ctx.gamma
    x = ctx.grid.points if sigma is None else sigma
    m0, n = potential_terms(gam, x)
    d1 = spectral_derivative(f, ctx.grid, 1, check)
    d2 = spectral_derivative(f, ctx.grid, 2, check=False)
    u, v = f
    du, dv = d1
    ddu, ddv = d2
    sgn = -1.0 if adjoint else 1.0
    out = np.empty_like(f)
    out[0] = -ddu + m0 * u + 2j * gam * du + sgn * 2.0 * n * v
    out[1] = -sgn * 2.0 * np.conj(n) * u + ddv - m0 * v + 2j * gam * dv
    return out


def smooth_step(y):
    """C-infinity step rising from 0 at y <= 0 to 1 at y >= 1."""
    y = np.clip(np.asarray(y, dtype=float), 0.0, 1.0)

    def bump(z):
        return np.where(z > 0, np.exp(-1.0 / np.maximum(z, 1e-300)), 0.0)

    a, b = bump(y), bump(1.0 - y)
    return a / (a + b)


def taper(grid: SigmaGrid, edge_fraction: float = 0.1):
    """Window equal to 1 on the interior and decaying smoothly in the outer
    ``edge_fraction`` of the box on each side."""
    x = grid.points
    width = edge_fraction * 2.0 * grid.half_width
    lo = smooth_step((x + grid.half_width) / width)
    hi = smooth_step((grid.half_width - x) / width)
    return lo * hi


def sample_pair(mode, grid: SigmaGrid, window=None):
    """Evaluate a mode on the grid as a (2, n) array, optionally tapered."""
    x = grid.points
    out = np.vstack([mode.u(x), mode.v(x)]).astype(complex)
    if window is not None:
        out = out * window
    return out


def pseudo_hermiticity_discrepancy(ctx: BdGContext, fs) -> float:
    """Max over test pairs of ``|L^dagger f - sigma3 L sigma3 f|``."""
    worst = 0.0
    for f in fs:
        lhs = apply_L(ctx, f, adjoint=True)
        rhs = SIGMA3 @ apply_L(ctx, SIGMA3 @ f)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def adjoint_identity_discrepancy(ctx: BdGContext, pairs) -> float:
    """Max relative ``|<f, L h> - <L^dagger f, h>|`` with the grid inner product."""
    h = ctx.grid.spacing
    worst = 0.0
    for f, g in pairs:
        a = h * np.vdot(f, apply_L(ctx, g))
        b = h * np.vdot(apply_L(ctx, f, adjoint=True), g)
        scale = max(1.0, abs(a))
        worst = max(worst, abs(a - b) / scale)
    return worst


def random_smooth_pairs(ctx: BdGContext, count: int, rng: np.random.Generator):
    """Random Gaussian-enveloped two-component test functions."""
    x = ctx.grid.points
    span = 0.25 * ctx.grid.half_width
    out = []
    for _ in range(count):
        comps = []
        for _c in range(2):
            centre = rng.uniform(-span, span)
            width = rng.uniform(0.7, 3.0)
            kk = rng.uniform(-3.0, 3.0)
            amp = rng.normal() + 1j * rng.normal()
            comps.append(amp * np.exp(-((x - centre) / width) ** 2 + 1j * kk * x))
        out.append(np.vstack(comps))
    return out


def resolution_tail(f, grid: SigmaGrid) -> float:
    """Relative spectral energy in the top ``TAIL_FRACTION`` of wavenumbers."""
    fk = np.fft.fft(np.asarray(f), axis=-1)
    q = grid.wavenumbers
    cut = np.abs(q) >= (1.0 - TAIL_FRACTION) * np.abs(q).max()
    total = np.linalg.norm(fk)
    return float(np.linalg.norm(fk[..., cut]) / total) if total else 0.0


def gamma_from_theta(theta: float) -> float:
    return math.tan(theta)
