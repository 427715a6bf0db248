"""Fourier transforms of the soliton profile functions.

``tanh`` does not decay, so its transform is split as the principal-value
transform of ``sign(x)`` (``2i/k``) plus the transform of ``tanh - sign``,
which decays exponentially.  All half-line integrals use QUADPACK's Fourier
weights (``scipy.integrate.quad`` with ``weight='sin'`` or ``'cos'``),
truncated where the exponentially decaying integrands underflow.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy import integrate

from ..errors import KFloorError, QuadratureError

QUAD_OPTS = dict(epsabs=1e-14, epsrel=1e-13, limit=400)
CUTOFF = 40.0
"""Upper limit of the half-line integrals; every integrand is below 1e-33 there."""


def _sech2(x):
    e = np.exp(-2.0 * np.abs(x))
    return 4.0 * e / (1.0 + e) ** 2


def _tanh_minus_one(x):
    e = np.exp(-2.0 * x)
    return -2.0 * e / (1.0 + e)


def _half_line(func, k, weight):
    val, err = integrate.quad(func, 0.0, CUTOFF, weight=weight, wvar=k, **QUAD_OPTS)
    if not np.isfinite(val) or err > 1e-9:
        raise QuadratureError(f"oscillatory quadrature did not converge (k={k}, est. error {err:g})")
    return val


def fourier_tanh(k: float, k_floor: float = 1e-6) -> complex:
    """``int e^{ikx} tanh(x) dx`` in the principal-value sense."""
    if abs(k) < k_floor:
        raise KFloorError(f"|k| = {abs(k)} below floor {k_floor}; the transform is distributional")
    ak = abs(k)
    # tanh(x) - 1 = -2 / (exp(2x) + 1), odd extension handled by the 2i factor
    rest = _half_line(_tanh_minus_one, ak, "sin")
    val = 2j / ak + 2j * rest
    return val if k > 0 else -val


def fourier_sech2(k: float) -> complex:
    """``int e^{ikx} sech^2(x) dx``."""
    return complex(2.0 * _half_line(_sech2, abs(k), "cos"))


def fourier_tanh_sech2(k: float) -> complex:
    """``int e^{ikx} tanh(x) sech^2(x) dx``."""
    val = 2j * _half_line(lambda x: np.tanh(x) * _sech2(x), abs(k), "sin")
    return val if k >= 0 else -val


def closed_form_tanh(k):
    return 1j * math.pi / math.sinh(math.pi * k / 2.0)


def closed_form_sech2(k):
    if k == 0:
        return 2.0 + 0j
    return complex(math.pi * k / math.sinh(math.pi * k / 2.0))


def closed_form_tanh_sech2(k):
    if k == 0:
        return 0j
    return 0.5j * math.pi * k * k / math.sinh(math.pi * k / 2.0)


class FourierIntegrals(NamedTuple):
    """Numeric and closed-form values, ordered (tanh, sech^2, tanh sech^2)."""

    k: float
    numeric: tuple
    closed: tuple

    @property
    def abs_errors(self):
        return tuple(abs(a - b) for a, b in zip(self.numeric, self.closed))


def analytic_fourier_integrals(k: float, k_floor: float = 1e-6) -> FourierIntegrals:
    """Evaluate the three profile transforms numerically and in closed form."""
    if abs(k) < k_floor:
        raise KFloorError(f"|k| = {abs(k)} below floor {k_floor}")
    numeric = (fourier_tanh(k, k_floor), fourier_sech2(k), fourier_tanh_sech2(k))
    closed = (closed_form_tanh(k), closed_form_sech2(k), closed_form_tanh_sech2(k))
    return FourierIntegrals(float(k), numeric, closed)
