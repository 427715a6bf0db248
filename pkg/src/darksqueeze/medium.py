"""Linear and Kerr response of a cold three-level Lambda medium.

The probe couples |1> -> |3>, the control couples |2> -> |3>.  All rates and
detunings are angular frequencies in rad/s, lengths are in cm and the
dispersion coefficients carry the matching cm/s units.

Kerr coefficient
----------------
Iterating the steady-state Bloch equations in powers of the probe Rabi
frequency gives the third-order coherence ``a31_3`` per unit ``|Omega_p|^2
Omega_p``.  The nonlinear polarisation term in the envelope equation is
``kappa * sigma31`` with ``kappa = |g_p|^2 N / c`` and ``sigma31`` expressed
through ``Omega_p = g_p E``.  Collecting the cubic piece gives
``kappa * a31_3 * |g_p|^2 |E|^2 E``, so with the field normalised to photon
number ``n0`` the Kerr coefficient is ``W = kappa * a31_3`` and the
nonlinearity length is ``1 / (n0 |g_p|^2 |W|)``.  The coherence ``a11_2``
is produced by the chain but does not enter ``a31_3``.

The coupling constant is recovered from ``|g_p|^2 = kappa c / (N_a V)``
where ``V`` is the quantisation volume.  ``V`` only fixes the photon number
corresponding to a given dimensionless nonlinearity ``g``.
"""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy import constants

from .errors import ConfigError, GainMediumError, PoleError

log = logging.getLogger(__name__)

C_CM = constants.c * 100.0
"""Speed of light in cm/s."""

TWO_PI = 2.0 * math.pi
MHZ = TWO_PI * 1e6

DEFAULT_POLE_FLOOR = 1e-12
"""Relative floor on every denominator, scaled by the natural rate squared."""

REGION_LABELS = ("DS", "BS", "damping", "none")


@dataclass(frozen=True)
class AtomicSystemParams:
    """Physical inputs of the Lambda system.

    Parameters
    ----------
    gamma13, gamma23 : float
        Spontaneous decay rates |3> -> |1> and |3> -> |2> [rad/s].
    delta2, delta3 : float
        Two-photon and one-photon detunings [rad/s].
    omega_c : float
        Half Rabi frequency of the control field [rad/s].
    coupling_density : float
        ``|g_p|^2 N / c`` [cm^-1 s^-1].
    atomic_density : float
        Atomic number density [cm^-3].
    pulse_duration : float
        Probe duration ``t0`` [s].
    mean_photon_number : float or None
        ``n0``.  ``None`` means "solve n0 so that g equals ``target_g``".
    dephasing21, dephasing31, dephasing32 : float
        Pure dephasing rates [rad/s].
    probe_wavelength : float
        Probe wavelength [m], only used for chi3.
    quantization_volume : float
        Mode volume ``V`` [cm^3] used to reconstruct ``|g_p|^2``.
    target_g : float
        Dimensionless nonlinearity used when ``mean_photon_number`` is None.
    dipole_source : {"total_decay", "partial_decay", "coupling"}
        How the probe dipole moment is inferred for chi3.
    """

    gamma13: float
    gamma23: float
    delta2: float
    delta3: float
    omega_c: float
    coupling_density: float
    atomic_density: float
    pulse_duration: float
    mean_photon_number: Optional[float] = None
    dephasing21: float = 0.0
    dephasing31: float = 0.0
    dephasing32: float = 0.0
    probe_wavelength: float = 780.24e-9
    quantization_volume: float = 1e-4
    target_g: float = 1.0
    dipole_source: str = "total_decay"

    def __post_init__(self):
        positive = ("gamma13", "gamma23", "omega_c", "coupling_density",
                    "atomic_density", "pulse_duration", "probe_wavelength",
                    "quantization_volume", "target_g")
        for name in positive:
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be finite and > 0, got {value!r}", name)
        for name in ("dephasing21", "dephasing31", "dephasing32"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value >= 0):
                raise ConfigError(f"{name} must be finite and >= 0, got {value!r}", name)
        for name in ("delta2", "delta3"):
            if not np.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite", name)
        n0 = self.mean_photon_number
        if n0 is not None and not (np.isfinite(n0) and n0 >= 1):
            raise ConfigError(f"mean_photon_number must be >= 1, got {n0!r}",
                              "mean_photon_number")
        if self.dipole_source not in ("total_decay", "partial_decay", "coupling"):
            raise ConfigError(f"unknown dipole_source {self.dipole_source!r}", "dipole_source")
        if not self.eit_regime:
            warnings.warn("control field below the EIT threshold |Omega_c|^2 <= gamma21*gamma31",
                          RuntimeWarning, stacklevel=3)

    @property
    def decay_total(self) -> float:
        """Total decay rate of the excited state, Gamma_3."""
        return self.gamma13 + self.gamma23

    @property
    def gamma21(self) -> float:
        # Gamma_1 = 0 and Gamma_2 = 0: only the excited state decays
        return self.dephasing21

    @property
    def gamma31(self) -> float:
        return 0.5 * self.decay_total + self.dephasing31

    @property
    def gamma32(self) -> float:
        return 0.5 * self.decay_total + self.dephasing32

    @property
    def eit_regime(self) -> bool:
        return self.omega_c ** 2 > self.gamma21 * self.gamma31

    def replace(self, **changes) -> "AtomicSystemParams":
        data = asdict(self)
        data.update(changes)
        return AtomicSystemParams(**data)

    @classmethod
    def reference(cls, **overrides) -> "AtomicSystemParams":
        """Cold 87Rb D2 operating point in the dark-soliton regime."""
        data = dict(
            gamma13=TWO_PI * 3e6,
            gamma23=TWO_PI * 3e6,
            delta2=-TWO_PI * 1.6e6,
            delta3=TWO_PI * 64e6,
            omega_c=TWO_PI * 42e6,
            coupling_density=2.4e10,
            atomic_density=8.8e11,
            pulse_duration=5.5e-8,
        )
        data.update(overrides)
        return cls(**data)


class ComplexDetunings(NamedTuple):
    d21: complex
    d31: complex
    d32: complex


class KerrChain(NamedTuple):
    """Steady-state coherences of the perturbative chain.

    First-order entries are per unit ``Omega_p``, second-order per
    ``|Omega_p|^2`` and ``a31_3`` per ``|Omega_p|^2 Omega_p``.
    """

    a21_1: complex
    a31_1: complex
    a11_2: complex
    a22_2: complex
    a33_2: complex
    a32_2: complex
    a31_3: complex


@dataclass(frozen=True)
class MediumCoefficients:
    """Dispersion series, Kerr coefficient and derived scales.

    Units: K0 [cm^-1], K1 [cm^-1 s], K2 [cm^-1 s^2], W [cm^-1 s^2],
    chi3 [m^2 V^-2], lengths [cm], Vg [cm/s].
    """

    K0: complex
    K1: complex
    K2: complex
    W: complex
    chi3: float
    Ldisp: float
    Lnln: float
    Labs: float
    g: float
    nu: float
    Vg: float
    n0: float
    gp_sq: float
    pulse_duration: float

    def as_dict(self) -> dict:
        return asdict(self)


def complex_detunings(params: AtomicSystemParams) -> ComplexDetunings:
    """Complex detunings ``d_ab = Delta_a - Delta_b + i gamma_ab`` with Delta_1 = 0."""
    return ComplexDetunings(
        complex(params.delta2, params.gamma21),
        complex(params.delta3, params.gamma31),
        complex(params.delta3 - params.delta2, params.gamma32),
    )


def _floor(params, pole_floor):
    scale = max(params.omega_c ** 2, params.gamma31 ** 2, params.delta3 ** 2)
    return pole_floor * scale


def _check(name, value, floor):
    if np.any(np.abs(value) <= floor):
        raise PoleError(name, value)


def dispersion_relation(params: AtomicSystemParams, omega, pole_floor: float = DEFAULT_POLE_FLOOR):
    """Linear dispersion ``K(omega)`` [cm^-1] for a sideband frequency omega [rad/s].

    Parameters
    ----------
    params : AtomicSystemParams
    omega : float or array_like
        Sideband angular frequency.
    pole_floor : float
        Relative floor on ``|D(omega)|``.

    Raises
    ------
    PoleError
        If ``D(omega) = |Omega_c|^2 - (omega + d21)(omega + d31)`` is below the floor.
    """
    d21, d31, _ = complex_detunings(params)
    w = np.asarray(omega, dtype=float)
    den = params.omega_c ** 2 - (w + d21) * (w + d31)
    _check("D(omega)", den, _floor(params, pole_floor))
    out = w / C_CM + params.coupling_density * (w + d21) / den
    return out[()] if out.ndim == 0 else out


def _dispersion_series(omega_c, kappa, d21, d31):
    """Analytic K0, K1, K2 at omega = 0.  Broadcasts over array inputs."""
    num = d21
    den = omega_c ** 2 - d21 * d31
    dden = -(d21 + d31)
    # f = num/den, num' = 1, den'' = -2
    f0 = num / den
    f1 = (den - num * dden) / den ** 2
    f2 = -2.0 * dden / den ** 2 + 2.0 * num / den ** 2 + 2.0 * num * dden ** 2 / den ** 3
    return kappa * f0, 1.0 / C_CM + kappa * f1, kappa * f2


def dispersion_coefficients(params: AtomicSystemParams, pole_floor: float = DEFAULT_POLE_FLOOR):
    """Return ``(K0, K1, K2)``, the omega-derivatives of K at omega = 0.

    Group velocity is ``1 / Re K1``.
    """
    d21, d31, _ = complex_detunings(params)
    _check("D(0) = |Omega_c|^2 - d21 d31", params.omega_c ** 2 - d21 * d31,
           _floor(params, pole_floor))
    K0, K1, K2 = _dispersion_series(params.omega_c, params.coupling_density, d21, d31)
    return complex(K0), complex(K1), complex(K2)


def _chain_arrays(omega_c, d21, d31, d32, gamma32, gamma13, gamma23):
    """Vectorised Kerr chain; denominators are not checked here."""
    oc = omega_c
    den = oc ** 2 - d21 * d31
    a21 = -np.conj(oc) / den
    a31 = d21 / den
    dc = 2.0 * gamma32 * abs(oc) ** 2 / np.abs(d32) ** 2
    a33 = -2.0 * np.imag(np.conj(a31)) / gamma13
    a22 = (2.0 * np.imag(np.conj(oc) / d32 * np.conj(a21)) / dc
           - (gamma23 + dc) / (gamma13 * dc) * 2.0 * np.imag(np.conj(a31)))
    a11 = -(a22 + a33)
    a32 = -(np.conj(a21) + oc * (a22 - a33)) / d32
    a31_3 = (oc * np.conj(a32) - d21 * (a22 + 2.0 * a33)) / den
    return a21, a31, a11, a22, a33, a32, a31_3, den, dc


def kerr_chain(params: AtomicSystemParams, pole_floor: float = DEFAULT_POLE_FLOOR) -> KerrChain:
    """Perturbative steady-state coherences up to third order.

    Raises
    ------
    PoleError
        Naming the vanishing denominator: ``|Omega_c|^2 - d21 d31``,
        ``d32``, ``Gamma13`` or ``D_c``.
    """
    d21, d31, d32 = complex_detunings(params)
    floor = _floor(params, pole_floor)
    _check("|Omega_c|^2 - d21 d31", params.omega_c ** 2 - d21 * d31, floor)
    _check("d32", d32, math.sqrt(floor))
    _check("Gamma13", params.gamma13, 0.0)
    dc = 2.0 * params.gamma32 * params.omega_c ** 2 / abs(d32) ** 2
    _check("D_c", dc, 0.0)
    vals = _chain_arrays(params.omega_c, d21, d31, d32, params.gamma32,
                         params.gamma13, params.gamma23)
    return KerrChain(*(complex(v) for v in vals[:7]))


def probe_coupling_sq(params: AtomicSystemParams) -> float:
    """``|g_p|^2 = kappa c / (N_a V)`` in s^-2 per photon."""
    n_atoms = params.atomic_density * params.quantization_volume
    return params.coupling_density * C_CM / n_atoms


def probe_frequency(params: AtomicSystemParams) -> float:
    """Probe carrier angular frequency [rad/s]."""
    return TWO_PI * constants.c / params.probe_wavelength


def dipole_moment_sq(params: AtomicSystemParams) -> float:
    """Squared probe transition dipole ``|p31|^2`` in (C m)^2.

    ``total_decay`` uses the spontaneous-emission relation with the full
    excited-state width Gamma_3, ``partial_decay`` with Gamma_13 alone and
    ``coupling`` inverts ``kappa = N_a omega_p |p|^2 / (2 eps0 hbar c)``.
    """
    wp = probe_frequency(params)
    if params.dipole_source == "coupling":
        kappa_si = params.coupling_density * 100.0  # m^-1 s^-1
        n_si = params.atomic_density * 1e6
        return 2.0 * constants.epsilon_0 * constants.hbar * constants.c * kappa_si / (n_si * wp)
    rate = params.decay_total if params.dipole_source == "total_decay" else params.gamma13
    return 3.0 * math.pi * constants.epsilon_0 * constants.hbar * constants.c ** 3 * rate / wp ** 3


def kerr_coefficient(params: AtomicSystemParams, pole_floor: float = DEFAULT_POLE_FLOOR):
    """Return ``(W, chi3)``.

    ``W = kappa a31_3`` [cm^-1 s^2] and
    ``chi3 = 2 c |p31|^2 W / (hbar^2 omega_p)`` evaluated in SI [m^2 V^-2];
    chi3 is the real part.
    """
    chain = kerr_chain(params, pole_floor)
    W = params.coupling_density * chain.a31_3
    w_si = W * 100.0
    chi3 = 2.0 * constants.c * dipole_moment_sq(params) * w_si / (
        constants.hbar ** 2 * probe_frequency(params))
    return complex(W), float(chi3.real)


def scale_lengths(params: AtomicSystemParams, K0: complex, K2: complex, W: complex,
                  n0: Optional[float] = None) -> dict:
    """Dispersion, nonlinearity and absorption lengths plus g and nu.

    Parameters
    ----------
    n0 : float, optional
        Overrides ``params.mean_photon_number``.  When both are None, n0 is
        solved so that ``g == params.target_g``.

    Raises
    ------
    ZeroDivisionError
        ``K2 == 0`` or ``W == 0``.
    GainMediumError
        ``Im K0 <= 0``.
    """
    if abs(K2) == 0:
        raise PoleError("K2", K2)
    if abs(W) == 0:
        raise PoleError("W", W)
    if K0.imag <= 0:
        raise GainMediumError("gain medium - absorption length undefined (Im K0 <= 0)")
    t0 = params.pulse_duration
    ldisp = t0 ** 2 / abs(K2)
    gp_sq = probe_coupling_sq(params)
    if n0 is None:
        n0 = params.mean_photon_number
    if n0 is None:
        n0 = solve_photon_number(ldisp, gp_sq, W, params.target_g)
    lnln = 1.0 / (n0 * gp_sq * abs(W))
    labs = 1.0 / K0.imag
    return dict(Ldisp=ldisp, Lnln=lnln, Labs=labs, g=ldisp / lnln, nu=ldisp / labs,
                n0=n0, gp_sq=gp_sq)


def solve_photon_number(ldisp: float, gp_sq: float, W: complex, target_g: float = 1.0) -> float:
    """Photon number for which ``Ldisp / Lnln == target_g``.

    g is linear in n0, so the root is explicit.
    """
    return target_g / (ldisp * gp_sq * abs(W))


def medium_coefficients(params: AtomicSystemParams, n0: Optional[float] = None,
                        pole_floor: float = DEFAULT_POLE_FLOOR) -> MediumCoefficients:
    """Full pipeline from atomic parameters to :class:`MediumCoefficients`."""
    K0, K1, K2 = dispersion_coefficients(params, pole_floor)
    W, chi3 = kerr_coefficient(params, pole_floor)
    sl = scale_lengths(params, K0, K2, W, n0)
    return MediumCoefficients(K0=K0, K1=K1, K2=K2, W=W, chi3=chi3, Vg=1.0 / K1.real,
                              pulse_duration=params.pulse_duration, **sl)


def soliton_velocity(coeffs: MediumCoefficients, A: float, theta: float):
    """Propagation velocity of the grey soliton.

    Implements ``V = V_g + A g t0 sin(theta) / L_disp`` as a literal sum.

    Returns
    -------
    velocity : float
        cm/s.
    fraction : float
        Velocity in units of c.
    """
    v = coeffs.Vg + A * coeffs.g * coeffs.pulse_duration * math.sin(theta) / coeffs.Ldisp
    return v, v / C_CM


# ---------------------------------------------------------------- region map


@dataclass
class RegionMap:
    """Soliton-existence labels on a (Delta3, Delta2) grid.

    ``labels[i, j]`` refers to ``delta2[i]`` and ``delta3[j]``.
    """

    delta3: np.ndarray
    delta2: np.ndarray
    labels: np.ndarray
    flags: np.ndarray
    sign_ratio: np.ndarray
    nu: np.ndarray
    lnln_over_ldisp: np.ndarray
    n0: float
    nu_max: float
    eta: float
    meta: dict = field(default_factory=dict)


def _classify_rows(params, delta2_rows, delta3, n0, nu_max, eta, pole_floor):
    d2 = np.asarray(delta2_rows, dtype=float)[:, None]
    d3 = np.asarray(delta3, dtype=float)[None, :]
    d21 = d2 + 1j * params.gamma21
    d31 = d3 + 1j * params.gamma31
    d32 = d3 - d2 + 1j * params.gamma32
    d21, d31, d32 = np.broadcast_arrays(d21, d31, d32)
    floor = _floor(params, pole_floor)
    with np.errstate(all="ignore"):
        K0, _, K2 = _dispersion_series(params.omega_c, params.coupling_density, d21, d31)
        vals = _chain_arrays(params.omega_c, d21, d31, d32, params.gamma32,
                             params.gamma13, params.gamma23)
        W = params.coupling_density * vals[6]
        den, dc = vals[7], vals[8]
        ldisp = params.pulse_duration ** 2 / np.abs(K2)
        gp_sq = probe_coupling_sq(params)
        lnln = np.where(np.abs(W) > 0, 1.0 / (n0 * gp_sq * np.abs(W)), np.inf)
        nu = ldisp * K0.imag
        ratio = W.real / K2.real
    flags = np.full(d21.shape, "", dtype=object)
    flags[np.abs(den) <= floor] = "pole:|Omega_c|^2-d21 d31"
    flags[np.abs(d32) <= math.sqrt(floor)] = "pole:d32"
    flags[(dc <= 0) & (flags == "")] = "pole:D_c"
    bad = ~np.isfinite(K0) | ~np.isfinite(K2) | ~np.isfinite(W) | (K2 == 0)
    flags[bad & (flags == "")] = "nonfinite"
    flags[(K0.imag < 0) & (flags == "")] = "gain"
    failed = flags != ""
    labels = np.where(nu > nu_max, "damping",
                      np.where(lnln > eta * ldisp, "none",
                               np.where(ratio > 0, "DS", "BS"))).astype(object)
    labels[failed] = "damping"
    return labels, flags, ratio, nu, lnln / ldisp


def region_classify(params: AtomicSystemParams, delta3, delta2, nu_max: float = 0.1,
                    eta: float = 10.0, n0: Optional[float] = None, workers: int = 1,
                    pole_floor: float = DEFAULT_POLE_FLOOR) -> RegionMap:
    """Classify every (Delta3, Delta2) point as DS, BS, damping or none.

    A point is "damping" if ``nu > nu_max``, else "none" if
    ``Lnln > eta * Ldisp``, else "DS" when ``Re W / Re K2 > 0`` and "BS"
    otherwise.  Points whose coefficients cannot be computed are labelled
    "damping" and carry a diagnostic flag.

    The photon number is held fixed over the map.  By default it is the value
    giving ``g = params.target_g`` at ``params`` itself.
    """
    delta3 = np.asarray(delta3, dtype=float)
    delta2 = np.asarray(delta2, dtype=float)
    if n0 is None:
        n0 = params.mean_photon_number
    if n0 is None:
        n0 = medium_coefficients(params).n0
    if workers > 1 and delta2.size > 1:
        chunks = np.array_split(delta2, min(workers, delta2.size))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_classify_rows, [params] * len(chunks), chunks,
                                  [delta3] * len(chunks), [n0] * len(chunks),
                                  [nu_max] * len(chunks), [eta] * len(chunks),
                                  [pole_floor] * len(chunks)))
        stacked = [np.concatenate([p[i] for p in parts], axis=0) for i in range(5)]
    else:
        stacked = _classify_rows(params, delta2, delta3, n0, nu_max, eta, pole_floor)
    labels, flags, ratio, nu, lr = stacked
    return RegionMap(delta3=delta3, delta2=delta2, labels=labels.astype(str),
                     flags=flags.astype(str), sign_ratio=ratio, nu=nu,
                     lnln_over_ldisp=lr, n0=float(n0), nu_max=nu_max, eta=eta)
