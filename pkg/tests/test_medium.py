import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import optimize

from darksqueeze.errors import ConfigError, GainMediumError, PoleError
from darksqueeze.medium import (MHZ, AtomicSystemParams, complex_detunings, dispersion_coefficients,
                                dispersion_relation, kerr_chain, kerr_coefficient,
                                medium_coefficients, region_classify, scale_lengths,
                                soliton_velocity)

REF = AtomicSystemParams.reference()

# frozen values at the reference parameters (regression, rel 1e-10)
FROZEN = {
    "K0": -3.2744906731587893 + 0.008421321919825432j,
    "K1": 3.0832505353868353e-07 - 1.5857371773274173e-09j,
    "K2": 3.193163119304869e-15 + 1.3287589373044318e-16j,
    "W": 8.195838807820108e-17 - 3.250722454794528e-19j,
    "chi3": 1.1627640358276638e-10,
    "Ldisp": 0.9465173631361714,
    "nu": 0.00797092741767401,
    "Vg": 3243330.3376513855,
    "n0": 1576.6137796579872,
}


@pytest.fixture(scope="module")
def coeffs():
    return medium_coefficients(REF)


@pytest.mark.parametrize("name", sorted(FROZEN))
def test_frozen_values(coeffs, name):
    got = getattr(coeffs, name)
    assert abs(got - FROZEN[name]) <= 1e-10 * abs(FROZEN[name])


def test_g_is_target(coeffs):
    assert coeffs.g == pytest.approx(1.0, rel=1e-14)
    assert coeffs.Lnln == pytest.approx(coeffs.Ldisp, rel=1e-14)


# -- independent oracle: K(omega) in extended precision -----------------------

def _mp_dispersion(params):
    mp.mp.prec = 128
    d21, d31, _ = complex_detunings(params)
    d21 = mp.mpc(d21.real, d21.imag)
    d31 = mp.mpc(d31.real, d31.imag)
    oc = mp.mpf(params.omega_c)
    kappa = mp.mpf(params.coupling_density)
    c = mp.mpf(29979245800)

    def K(w):
        return w / c + kappa * (w + d21) / (oc ** 2 - (w + d21) * (w + d31))

    return K


def test_dispersion_series_against_mp_derivatives():
    K = _mp_dispersion(REF)
    K0, K1, K2 = dispersion_coefficients(REF)
    with mp.workprec(128):
        ref = [complex(mp.diff(K, 0, n)) for n in range(3)]
    for got, want in zip((K0, K1, K2), ref):
        assert abs(got - want) <= 1e-11 * abs(want)


@pytest.mark.parametrize("omega", [-3e7, -1e6, 0.0, 2e6, 5e7])
def test_dispersion_relation_against_mp(omega):
    K = _mp_dispersion(REF)
    with mp.workprec(128):
        want = complex(K(mp.mpf(omega)))
    assert abs(dispersion_relation(REF, omega) - want) <= 1e-12 * abs(want)


# -- independent oracle: steady state of the full Bloch equations -------------

def _bloch_steady(params, omega_p):
    """Exact steady state of the noise-free density-matrix equations.

    The equations are real-linear in (S22, S33, S21, S31, S32); the 8x8
    system is assembled column by column and solved in 40-digit arithmetic.
    """
    mp.mp.dps = 40
    d21, d31, d32 = [mp.mpc(z.real, z.imag) for z in complex_detunings(params)]
    oc = mp.mpf(params.omega_c)
    g23 = mp.mpf(params.gamma23)
    g3 = mp.mpf(params.decay_total)
    op = mp.mpf(omega_p)

    def eqs(x):
        s22, s33 = x[0], x[1]
        s21, s31, s32 = mp.mpc(x[2], x[3]), mp.mpc(x[4], x[5]), mp.mpc(x[6], x[7])
        s23, s13, s12 = mp.conj(s32), mp.conj(s31), mp.conj(s21)
        a = -1j * g23 * s33 - oc * s23 + oc * s32
        b = 1j * g3 * s33 + op * s13 - op * s31 + oc * s23 - oc * s32
        c = d21 * s21 + oc * s31 - op * s23
        d = d31 * s31 + oc * s21 + op * (1 - s22 - 2 * s33)
        e = d32 * s32 + oc * (s22 - s33) + op * s12
        return [mp.im(a), mp.im(b), mp.re(c), mp.im(c), mp.re(d), mp.im(d), mp.re(e), mp.im(e)]

    r0 = eqs([mp.mpf(0)] * 8)
    A = mp.matrix(8, 8)
    for j in range(8):
        x = [mp.mpf(0)] * 8
        x[j] = mp.mpf(1)
        r = eqs(x)
        for i in range(8):
            A[i, j] = r[i] - r0[i]
    return mp.lu_solve(A, mp.matrix([-v for v in r0]))


@pytest.fixture(scope="module")
def bloch():
    eps = [REF.omega_c * f for f in (1e-4, 2e-4, 3e-4)]
    return eps, [_bloch_steady(REF, e) for e in eps]


def test_kerr_chain_linear_and_cubic_terms(bloch):
    eps, sols = bloch
    ch = kerr_chain(REF)
    # S31 / Omega_p = a31_1 + a31_3 eps^2 + O(eps^4)
    vals = [mp.mpc(s[4], s[5]) / e for s, e in zip(sols, eps)]
    M = mp.matrix([[1, e ** 2, e ** 4] for e in eps])
    fit = mp.lu_solve(M, mp.matrix(vals))
    assert abs(complex(fit[0]) - ch.a31_1) <= 1e-10 * abs(ch.a31_1)
    assert abs(complex(fit[1]) - ch.a31_3) <= 1e-8 * abs(ch.a31_3)


def test_kerr_chain_low_order_terms(bloch):
    eps, sols = bloch
    ch = kerr_chain(REF)
    s, e = sols[0], eps[0]
    assert abs(complex(mp.mpc(s[2], s[3])) / e - ch.a21_1) <= 1e-6 * abs(ch.a21_1)
    assert float(s[0]) / e ** 2 == pytest.approx(ch.a22_2.real, rel=1e-6)
    assert float(s[1]) / e ** 2 == pytest.approx(ch.a33_2.real, rel=1e-6)
    assert abs(complex(mp.mpc(s[6], s[7])) / e ** 2 - ch.a32_2) <= 1e-6 * abs(ch.a32_2)


# -- properties ---------------------------------------------------------------

@given(d2=st.floats(-5, 5), d3=st.floats(-100, 100), omega=st.floats(-5e6, 5e6))
def test_detuning_reversal_conjugates_dispersion(d2, d3, omega):
    p = REF.replace(delta2=d2 * MHZ, delta3=d3 * MHZ)
    q = REF.replace(delta2=-d2 * MHZ, delta3=-d3 * MHZ)
    try:
        k = dispersion_relation(p, omega)
        km = dispersion_relation(q, -omega)
    except PoleError:
        return
    assert abs(km + np.conj(k)) <= 1e-10 * max(abs(k), 1.0)


@given(d2=st.floats(-5, 5).filter(lambda v: abs(v) > 1e-3), d3=st.floats(-100, 100))
def test_detuning_reversal_series(d2, d3):
    p = REF.replace(delta2=d2 * MHZ, delta3=d3 * MHZ)
    q = REF.replace(delta2=-d2 * MHZ, delta3=-d3 * MHZ)
    a, b = dispersion_coefficients(p), dispersion_coefficients(q)
    assert abs(b[0] + np.conj(a[0])) <= 1e-10 * abs(a[0])
    assert abs(b[1] - np.conj(a[1])) <= 1e-10 * abs(a[1])
    assert abs(b[2] + np.conj(a[2])) <= 1e-10 * abs(a[2])


def test_chi3_scales_with_dipole_source():
    full = kerr_coefficient(REF)[1]
    part = kerr_coefficient(REF.replace(dipole_source="partial_decay"))[1]
    assert part / full == pytest.approx(REF.gamma13 / REF.decay_total, rel=1e-12)


def test_velocity_reduces_to_group_velocity(coeffs):
    v, frac = soliton_velocity(coeffs, 1.0, 0.0)
    assert v == coeffs.Vg
    v2, _ = soliton_velocity(coeffs, 1.0, math.pi / 2)
    assert v2 > v


def test_explicit_photon_number_scales_g(coeffs):
    c2 = medium_coefficients(REF, n0=2 * coeffs.n0)
    assert c2.g == pytest.approx(2.0, rel=1e-12)


# -- region map ---------------------------------------------------------------

def test_region_boundary_matches_sign_change():
    d3 = np.linspace(-100, 100, 200) * MHZ
    rm = region_classify(REF, d3, np.array([REF.delta2]))
    labels = rm.labels[0]
    soliton = np.isin(labels, ["DS", "BS"])
    assert np.all(rm.sign_ratio[0][labels == "DS"] > 0)
    assert np.all(rm.sign_ratio[0][labels == "BS"] < 0)

    def ratio(x):
        c = medium_coefficients(REF.replace(delta3=x))
        return c.W.real / c.K2.real

    # nearest DS/BS pair on either side of each change of soliton type
    idx = np.flatnonzero(soliton)
    pairs = [(i, j) for i, j in zip(idx[:-1], idx[1:]) if labels[i] != labels[j]]
    assert pairs
    for i, j in pairs:
        root = optimize.brentq(ratio, d3[i], d3[j], xtol=1.0)
        assert d3[i] <= root <= d3[j]


def test_region_workers_agree():
    d3 = np.linspace(-100, 100, 40) * MHZ
    d2 = np.linspace(-4, 4, 12) * MHZ
    a = region_classify(REF, d3, d2)
    b = region_classify(REF, d3, d2, workers=2)
    assert np.array_equal(a.labels, b.labels)
    assert np.array_equal(a.sign_ratio, b.sign_ratio)


# -- validation and failure modes --------------------------------------------

@pytest.mark.parametrize("field,value", [("gamma13", -1.0), ("omega_c", 0.0),
                                         ("dephasing21", -1.0), ("delta2", math.inf),
                                         ("mean_photon_number", 0.5),
                                         ("dipole_source", "other")])
def test_invalid_params(field, value):
    with pytest.raises(ConfigError) as exc:
        REF.replace(**{field: value})
    assert exc.value.field == field


def test_weak_control_warns():
    with pytest.warns(RuntimeWarning, match="EIT"):
        REF.replace(omega_c=1.0, dephasing21=1e3)


def test_pole_and_gain_errors(coeffs):
    with pytest.raises(PoleError):
        scale_lengths(REF, coeffs.K0, 0j, coeffs.W)
    with pytest.raises(GainMediumError):
        scale_lengths(REF, complex(coeffs.K0.real, -1e-3), coeffs.K2, coeffs.W)


def test_pole_floor_is_enforced():
    with pytest.raises(PoleError):
        dispersion_relation(REF, 0.0, pole_floor=1.0)
    with pytest.raises(PoleError):
        kerr_chain(REF, pole_floor=1.0)
