"""Zero-mode Gaussian dynamics and quadrature squeezing of the dark soliton.

The diagonal Hamiltonian makes the zero mode a free particle:
``Q(s) = Q(0) + c0 s P(0)``, ``P(s) = P(0)`` with ``c0 = A^2 g^2 cos^2(theta)``.
For vacuum input the quadrature ``X = Q cos(th) + P sin(th)`` has::

    <X^2>(s) = (c0 s cos(th) + sin(th))^2 / 2 + cos(th)^2 / 2

Squeezing ratios are reported as ``R = <X^2>(s) / <X^2>(0)`` and in decibels
as ``10 log10 R`` (variance ratio, so negative dB means squeezed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy import optimize

from .bdg.modes import eigenvalue_plus
from .soliton import DarkSolitonParams

DB_CONVENTION = "10*log10(variance ratio)"
THETA_OPT_AT_ZERO = math.pi / 2
"""Tie-break for the flat objective at s = 0."""


@dataclass(frozen=True)
class ZeroModeGaussianState:
    """First and second moments of ``(Q, P)``."""

    mean_q: float = 0.0
    mean_p: float = 0.0
    cov_qq: float = 0.5
    cov_qp: float = 0.0
    cov_pp: float = 0.5
    s: float = 0.0

    @classmethod
    def vacuum(cls) -> "ZeroModeGaussianState":
        return cls()

    @property
    def covariance(self) -> np.ndarray:
        return np.array([[self.cov_qq, self.cov_qp], [self.cov_qp, self.cov_pp]])

    @property
    def uncertainty_product(self) -> float:
        return self.cov_qq * self.cov_pp - self.cov_qp ** 2

    def is_physical(self, tol: float = 1e-12) -> bool:
        return self.uncertainty_product >= 0.25 - tol

    def scaled(self, factor: float) -> "ZeroModeGaussianState":
        """Covariance multiplied by ``factor`` (thermal-like input)."""
        return replace(self, cov_qq=self.cov_qq * factor, cov_qp=self.cov_qp * factor,
                       cov_pp=self.cov_pp * factor)


def zero_mode_rate(p: DarkSolitonParams) -> float:
    """``c0 = A^2 g^2 cos^2(theta)``."""
    return p.prefactor


def shear(c0: float, ds: float) -> np.ndarray:
    return np.array([[1.0, c0 * ds], [0.0, 1.0]])


def evolve_zero_mode(state: ZeroModeGaussianState, c0: float, s: float) -> ZeroModeGaussianState:
    """Propagate by a distance ``s`` with the free-particle shear."""
    S = shear(c0, s)
    mean = S @ np.array([state.mean_q, state.mean_p])
    cov = S @ state.covariance @ S.T
    return ZeroModeGaussianState(float(mean[0]), float(mean[1]), float(cov[0, 0]),
                                 float(cov[0, 1]), float(cov[1, 1]), state.s + s)


TRIG_SNAP = 1e-15


def _trig(theta):
    """cos and sin with values below 1e-15 set to zero.

    A float such as ``pi/2`` is only within 6e-17 of the intended angle; the
    snap makes the quadratures at multiples of pi/2 exact.
    """
    c, sn = np.cos(theta), np.sin(theta)
    return np.where(np.abs(c) < TRIG_SNAP, 0.0, c), np.where(np.abs(sn) < TRIG_SNAP, 0.0, sn)


def variance_closed_form(c0: float, theta, s):
    """Vacuum-input quadrature variance; broadcasts over theta and s.

    ``((c0 s cos + sin)^2 + cos^2) / 2``, equal to 1/2 exactly at s = 0.
    """
    theta = np.asarray(theta, dtype=float)
    b = c0 * np.asarray(s, dtype=float)
    c, sn = _trig(theta)
    out = np.where(b == 0.0, 0.5, 0.5 * (b * c + sn) ** 2 + 0.5 * c * c)
    return out[()] if out.ndim == 0 else out


def variance_from_state(state: ZeroModeGaussianState, theta):
    """``<X^2> - <X>^2`` from a covariance matrix."""
    theta = np.asarray(theta, dtype=float)
    c, sn = _trig(theta)
    return state.cov_qq * c * c + 2.0 * state.cov_qp * c * sn + state.cov_pp * sn * sn


def quadrature_variance(c0: float, theta, s, method: str = "closed",
                        state: Optional[ZeroModeGaussianState] = None):
    """Quadrature variance at detection angle ``theta`` after distance ``s``.

    Parameters
    ----------
    method : {"closed", "covariance"}
        Closed-form vacuum expression, or contraction of the evolved
        covariance of ``state`` (vacuum by default).
    """
    if method == "closed":
        if state is not None:
            raise ValueError("closed form assumes vacuum input")
        return variance_closed_form(c0, theta, s)
    if method != "covariance":
        raise ValueError(f"unknown method {method!r}")
    state = ZeroModeGaussianState.vacuum() if state is None else state
    s = np.asarray(s, dtype=float)
    if s.ndim == 0:
        return variance_from_state(evolve_zero_mode(state, c0, float(s)), theta)
    theta = np.asarray(theta, dtype=float)
    # same contraction, vectorised over s
    qq = state.cov_qq + 2.0 * c0 * s * state.cov_qp + (c0 * s) ** 2 * state.cov_pp
    qp = state.cov_qp + c0 * s * state.cov_pp
    c, sn = _trig(theta)
    return qq * c * c + 2.0 * qp * c * sn + state.cov_pp * sn * sn


def to_db(ratio):
    return 10.0 * np.log10(ratio)


def squeezing_ratio(theta, s, c0: float):
    """Return ``(R, R_dB)`` for vacuum input."""
    r = variance_closed_form(c0, theta, s) / variance_closed_form(c0, theta, 0.0)
    return r, to_db(r)


def _vmin(b):
    # (1 + b^2/2 - sqrt(b^4/4 + b^2)) / 2 without the cancellation at large b
    b2 = np.asarray(b, dtype=float) ** 2
    den = 0.5 * b2 + np.sqrt(0.25 * b2 * b2 + b2)
    safe = np.where(den > 0, den, 1.0)
    return 0.5 * (1.0 - np.where(den > 0, b2 / safe, 0.0))


def optimum_angle(s: float, c0: float, tie_break: float = THETA_OPT_AT_ZERO):
    """Closed-form minimiser of the variance over ``theta in [0, pi)``.

    With ``b = c0 s`` the stationary condition is ``tan(2 theta) = 2 / b``;
    the minimum is ``(1 + b^2/2 - sqrt(b^4/4 + b^2)) / 2``.  For ``b > 0``
    the minimiser lies in ``(pi/2, 3pi/4)`` and decreases towards pi/2.

    Returns
    -------
    theta_opt, v_min
    """
    b = c0 * s
    if b == 0.0:
        return tie_break, 0.5
    # 2 theta = pi + atan2(b, b^2/2) places the cosine at its minimum
    theta = 0.5 * (math.pi + math.atan2(b, 0.5 * b * b))
    theta = theta % math.pi
    return theta, float(_vmin(b))


def variance_slope(c0: float, theta, s):
    """``d<X^2>/d theta`` differentiated directly from the variance expression."""
    b = c0 * s
    c, sn = np.cos(theta), np.sin(theta)
    return (b * c + sn) * (c - b * sn) - c * sn


def optimum_angle_search(s: float, c0: float, coarse: int = 64, tol: float = 1e-14):
    """Independent golden-section search for the variance minimum.

    The coarse scan picks the basin; golden section then minimises
    ``|dV/d theta|``, whose kink at the stationary point is located to
    rounding precision (minimising V itself is limited to ~sqrt(eps)).
    """
    grid = np.linspace(0.0, math.pi, coarse, endpoint=False)
    vals = variance_closed_form(c0, grid, s)
    i = int(np.argmin(vals))
    h = math.pi / coarse
    f = lambda th: abs(float(variance_slope(c0, th, s)))
    res = optimize.minimize_scalar(f, bracket=(grid[i] - h, grid[i], grid[i] + h),
                                   method="golden", tol=tol)
    th = float(res.x) % math.pi
    return th, float(variance_closed_form(c0, th, s))


def min_ratio(s, c0: float):
    """``min_theta R`` as a linear ratio; vectorised over s."""
    return _vmin(c0 * np.asarray(s, dtype=float)) / 0.5


@dataclass
class SqueezeGrid:
    """Variance and squeezing ratio sampled on an (s, theta) grid.

    ``variance[i, j]`` and ``ratio_db[i, j]`` refer to ``s_values[i]`` and
    ``theta_values[j]``.
    """

    s_values: np.ndarray
    theta_values: np.ndarray
    variance: np.ndarray
    ratio_db: np.ndarray
    theta_opt: np.ndarray
    rmin_db: np.ndarray
    c0: float
    two_path_max_diff: float
    meta: dict = field(default_factory=dict)


def squeeze_grid(s_values, theta_values, c0: float) -> SqueezeGrid:
    s = np.asarray(s_values, dtype=float)
    th = np.asarray(theta_values, dtype=float)
    S, TH = np.meshgrid(s, th, indexing="ij")
    var = variance_closed_form(c0, TH, S)
    var_cov = quadrature_variance(c0, TH, S, method="covariance")
    ratio = var / variance_closed_form(c0, TH, 0.0)
    opt = np.array([optimum_angle(float(x), c0)[0] for x in s])
    return SqueezeGrid(s, th, var, to_db(ratio), opt, to_db(min_ratio(s, c0)), c0,
                       float(np.max(np.abs(var - var_cov))),
                       meta={"db_convention": DB_CONVENTION, "c0": c0})


def min_squeeze_curves(s_values, cases: Sequence):
    """``R_min(s)`` for each ``(A, g, theta)`` case, as linear ratios."""
    s = np.asarray(s_values, dtype=float)
    out = {}
    for A, g, th in cases:
        c0 = (A * g * math.cos(th)) ** 2
        out[(A, g, th)] = min_ratio(s, c0)
    return out


def continuous_mode_phase(k, s, c0: float, gamma: float):
    """Phase factor ``exp(-i c0 E_k s)`` acquired by a continuous mode."""
    return np.exp(-1j * c0 * eigenvalue_plus(gamma, k) * np.asarray(s, dtype=float))


def renormalized_intensity(p: DarkSolitonParams, cov_qq: float, tau, s: float = 0.0,
                           nodes: int = 80):
    """Mean intensity with the dip position smeared by the zero-mode Q spread.

    The envelope ``A sqrt(g) (cos(th) tanh(sigma + Q/sqrt(g)) + i sin(th))``
    is averaged over ``Q ~ N(0, cov_qq)`` by Gauss-Hermite quadrature; the
    momentum phase factor drops out of the modulus.
    """
    sigma = p.width_rate * (np.asarray(tau, dtype=float) - p.tau0 - p.velocity * s)
    c2 = math.cos(p.theta) ** 2
    s2 = math.sin(p.theta) ** 2
    if cov_qq == 0.0:
        return p.background * (c2 * np.tanh(sigma) ** 2 + s2)
    x, w = np.polynomial.hermite_e.hermegauss(nodes)
    w = w / w.sum()
    shift = math.sqrt(cov_qq) * x / math.sqrt(p.g)
    t2 = np.tanh(sigma[..., None] + shift) ** 2
    return p.background * (c2 * (t2 @ w) + s2)


def philox_generator(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator; ``stream`` selects an independent substream."""
    ss = np.random.SeedSequence(seed)
    child = ss.spawn(stream + 1)[stream]
    return np.random.Generator(np.random.Philox(child))


def sample_vacuum(n: int, seed: int, batches: int = 8):
    """``n`` vacuum samples of (Q, P), generated in independent batches.

    Each batch has its own spawned stream, so the result does not depend on
    how batches are scheduled.
    """
    sizes = [n // batches + (1 if i < n % batches else 0) for i in range(batches)]
    qs, ps = [], []
    for i, m in enumerate(sizes):
        rng = philox_generator(seed, i)
        z = rng.standard_normal((2, m)) * math.sqrt(0.5)
        qs.append(z[0])
        ps.append(z[1])
    return np.concatenate(qs), np.concatenate(ps)


@dataclass
class MonteCarloCheck:
    estimate: float
    exact: float
    std_error: float

    @property
    def sigmas(self) -> float:
        return abs(self.estimate - self.exact) / self.std_error


def monte_carlo_variance(c0: float, theta: float, s: float, n: int = 10 ** 6,
                         seed: int = 0) -> MonteCarloCheck:
    """Sample variance of X_theta after pushing vacuum samples through the shear."""
    q, p = sample_vacuum(n, seed)
    x = (q + c0 * s * p) * math.cos(theta) + p * math.sin(theta)
    est = float(np.var(x, ddof=1))
    exact = float(variance_closed_form(c0, theta, s))
    # Gaussian sample variance: SE = var * sqrt(2 / (n - 1))
    return MonteCarloCheck(est, exact, exact * math.sqrt(2.0 / (n - 1)))


def monte_carlo_profile(p: DarkSolitonParams, cov_qq: float, tau, n: int = 10 ** 5,
                        seed: int = 0):
    """Monte-Carlo mean intensity and pointwise standard error."""
    rng = philox_generator(seed, 0)
    q = rng.standard_normal(n) * math.sqrt(cov_qq)
    sigma = p.width_rate * (np.asarray(tau, dtype=float) - p.tau0)
    c2 = math.cos(p.theta) ** 2
    acc = np.zeros_like(sigma)
    acc2 = np.zeros_like(sigma)
    for chunk in np.array_split(q, max(1, n // 5000)):
        vals = p.background * (c2 * np.tanh(sigma[:, None] + chunk[None, :] / math.sqrt(p.g)) ** 2
                               + math.sin(p.theta) ** 2)
        acc += vals.sum(axis=1)
        acc2 += (vals ** 2).sum(axis=1)
    mean = acc / n
    var = np.maximum(acc2 / n - mean ** 2, 0.0)
    return mean, np.sqrt(var / n)
