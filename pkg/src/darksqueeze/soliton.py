"""Grey and black soliton solutions of the defocusing NLS.

The dimensionless envelope obeys::

    i dU/ds + d^2U/dtau^2 - 2 g |U|^2 U + mu U = 0

and admits ``U0 = A sqrt(g) (cos(th) tanh(sigma) + i sin(th)) exp(i theta0)``
with ``sigma = A g cos(th) (tau - tau0 - 2 A g sin(th) s)`` and
``mu = 2 A^2 g^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class DarkSolitonParams:
    """Soliton parameters.

    Attributes
    ----------
    A : float
        Amplitude.
    g : float
        Nonlinear coefficient.
    theta : float
        Blackness angle in [0, pi/2]; 0 is black, pi/2 is pure background.
    theta0 : float
        Global phase.
    tau0 : float
        Initial dip position.
    mu : float, optional
        Chemical potential; defaults to ``2 A^2 g^2``.  Passing another value
        is allowed and yields a field that is no longer a solution.
    """

    A: float = 1.0
    g: float = 1.0
    theta: float = 0.0
    theta0: float = 0.0
    tau0: float = 0.0
    mu: Optional[float] = None

    def __post_init__(self):
        if not (0.0 <= self.theta <= math.pi / 2 + 1e-15):
            raise ConfigError(f"theta must lie in [0, pi/2], got {self.theta!r}", "theta")
        if self.g < 0:
            raise ConfigError("g must be non-negative", "g")
        if self.mu is None:
            object.__setattr__(self, "mu", 2.0 * self.A ** 2 * self.g ** 2)

    @property
    def mu_consistent(self) -> bool:
        return abs(self.mu - 2.0 * self.A ** 2 * self.g ** 2) <= 1e-14 * max(1.0, abs(self.mu))

    @property
    def gamma(self) -> float:
        """``tan(theta)``, the moving-frame parameter of the fluctuation operator."""
        return math.tan(self.theta)

    @property
    def width_rate(self) -> float:
        """``A g cos(theta)``: inverse dip width."""
        return self.A * self.g * math.cos(self.theta)

    @property
    def velocity(self) -> float:
        """Dip velocity ``d tau / d s``."""
        return 2.0 * self.A * self.g * math.sin(self.theta)

    @property
    def background(self) -> float:
        return self.A ** 2 * self.g

    @property
    def blackness(self) -> float:
        return self.A ** 2 * self.g * math.cos(self.theta) ** 2

    @property
    def prefactor(self) -> float:
        """``A^2 g^2 cos^2(theta)``, the rate multiplying the fluctuation operator."""
        return (self.A * self.g * math.cos(self.theta)) ** 2

    def with_(self, **changes) -> "DarkSolitonParams":
        if "mu" not in changes and self.mu_consistent:
            changes["mu"] = None
        return replace(self, **changes)


class FieldSample(NamedTuple):
    s: np.ndarray
    tau: np.ndarray
    value: np.ndarray
    intensity: np.ndarray
    phase: np.ndarray


def soliton_sigma(p: DarkSolitonParams, s, tau):
    s = np.asarray(s, dtype=float)
    tau = np.asarray(tau, dtype=float)
    return p.width_rate * (tau - p.tau0 - p.velocity * s)


def dip_position(p: DarkSolitonParams, s):
    return p.tau0 + p.velocity * np.asarray(s, dtype=float)


def soliton_field(p: DarkSolitonParams, s, tau):
    """Complex envelope ``U0(s, tau)``; broadcasts over s and tau."""
    sig = soliton_sigma(p, s, tau)
    amp = p.A * math.sqrt(p.g)
    return amp * (math.cos(p.theta) * np.tanh(sig) + 1j * math.sin(p.theta)) * np.exp(1j * p.theta0)


def soliton_intensity(p: DarkSolitonParams, s, tau):
    sig = soliton_sigma(p, s, tau)
    return p.background * (math.cos(p.theta) ** 2 * np.tanh(sig) ** 2 + math.sin(p.theta) ** 2)


def soliton_phase(p: DarkSolitonParams, s, tau):
    """Phase ``arctan(cos(theta) tanh(sigma) / sin(theta))``.

    At theta = 0 the limit ``(pi/2) sign(tanh sigma)`` is used; the single
    point sigma = 0 takes the mean of the two one-sided values, 0.
    """
    sig = soliton_sigma(p, s, tau)
    if p.theta == 0.0:
        return 0.5 * math.pi * np.sign(np.tanh(sig))
    return np.arctan(math.cos(p.theta) * np.tanh(sig) / math.sin(p.theta))


def phase_jump(p: DarkSolitonParams) -> float:
    """Total phase change across the dip, ``pi - 2 theta``."""
    return math.pi - 2.0 * p.theta


def sample_field(p: DarkSolitonParams, s, tau) -> FieldSample:
    s_b, tau_b = np.broadcast_arrays(np.asarray(s, float), np.asarray(tau, float))
    value = soliton_field(p, s_b, tau_b)
    return FieldSample(s_b, tau_b, value, np.abs(value) ** 2, soliton_phase(p, s_b, tau_b))


def _analytic_terms(p, s, tau):
    sig = soliton_sigma(p, s, tau)
    a = p.width_rate
    amp = p.A * math.sqrt(p.g) * np.exp(1j * p.theta0)
    c, sn = math.cos(p.theta), math.sin(p.theta)
    t = np.tanh(sig)
    sech2 = 1.0 - t ** 2
    u = amp * (c * t + 1j * sn)
    u_tt = amp * c * a * a * (-2.0 * sech2 * t)
    u_s = amp * c * sech2 * (-a * p.velocity)
    return u, u_s, u_tt


def nls_residual(p: DarkSolitonParams, s, tau, method: str = "analytic", step: Optional[float] = None):
    """Maximum ``|i U_s + U_tautau - 2 g |U|^2 U + mu U|`` over a grid.

    Parameters
    ----------
    s, tau : array_like
        Sample points (broadcast against each other).
    method : {"analytic", "fd4"}
        Exact derivatives, or fourth-order central differences with spacing
        ``step`` in both s and tau.
    step : float, optional
        Difference step for ``fd4``; defaults to 0.05.
    """
    s, tau = np.broadcast_arrays(np.asarray(s, float), np.asarray(tau, float))
    if method == "analytic":
        u, u_s, u_tt = _analytic_terms(p, s, tau)
    elif method == "fd4":
        h = 0.05 if step is None else step
        f = lambda ds, dt: soliton_field(p, s + ds, tau + dt)
        u = f(0.0, 0.0)
        u_s = (-f(2 * h, 0) + 8 * f(h, 0) - 8 * f(-h, 0) + f(-2 * h, 0)) / (12 * h)
        u_tt = (-f(0, 2 * h) + 16 * f(0, h) - 30 * u + 16 * f(0, -h) - f(0, -2 * h)) / (12 * h * h)
    else:
        raise ValueError(f"unknown method {method!r}")
    res = 1j * u_s + u_tt - 2.0 * p.g * np.abs(u) ** 2 * u + p.mu * u
    return float(np.max(np.abs(res)))


def figure_tau_grid(p: DarkSolitonParams, count: int = 2048, span: float = 10.0):
    """tau grid covering ``|sigma| <= span`` around the initial dip."""
    rate = max(p.width_rate, 1e-3)
    return p.tau0 + np.linspace(-span / rate, span / rate, count)


def profile_dataset(thetas, A: float = 1.0, g: float = 1.0, count: int = 2048, span: float = 10.0):
    """Intensity and phase profiles at s = 0 for several blackness angles.

    Returns a list of ``(theta, tau, intensity, phase)`` rows in long format.
    """
    rows = []
    for th in thetas:
        p = DarkSolitonParams(A=A, g=g, theta=float(th))
        tau = figure_tau_grid(p, count, span)
        smp = sample_field(p, 0.0, tau)
        for t, i, ph in zip(tau, smp.intensity, smp.phase):
            rows.append((float(th), float(t), float(i), float(ph)))
    return rows
