import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from darksqueeze.errors import ConfigError
from darksqueeze.soliton import (DarkSolitonParams, dip_position, nls_residual, phase_jump,
                                 profile_dataset, sample_field, soliton_field, soliton_intensity,
                                 soliton_phase)

TAU = np.linspace(-6, 6, 241)
S = np.linspace(0, 1, 11)[:, None]


def test_symbolic_solution():
    # independent derivation: with T = tanh(sigma), d/dsigma acts as (1 - T^2) d/dT
    T, A, g, c, sn = sp.symbols("T A g c sn")
    a = A * g * c
    v = 2 * A * g * sn
    amp = A * sp.sqrt(g)
    U = amp * (c * T + sp.I * sn)
    Ubar = amp * (c * T - sp.I * sn)
    d = lambda f: sp.diff(f, T) * (1 - T ** 2)
    res = sp.I * (-a * v * d(U)) + a ** 2 * d(d(U)) - 2 * g * U * Ubar * U + 2 * A ** 2 * g ** 2 * U
    # reduce modulo sin^2 + cos^2 = 1
    assert sp.expand(sp.rem(sp.expand(res), sn ** 2 + c ** 2 - 1, sn)) == 0


@given(A=st.floats(0.2, 2.0), g=st.floats(0.1, 2.0), theta=st.floats(0.0, math.pi / 2),
       theta0=st.floats(-3, 3), tau0=st.floats(-2, 2))
def test_analytic_residual_vanishes(A, g, theta, theta0, tau0):
    p = DarkSolitonParams(A=A, g=g, theta=theta, theta0=theta0, tau0=tau0)
    scale = p.background ** 1.5 * g + 1.0
    assert nls_residual(p, S, TAU[None, :]) < 1e-12 * scale


@pytest.mark.parametrize("theta", [0.0, math.pi / 6, math.pi / 3])
def test_finite_difference_residual(theta):
    p = DarkSolitonParams(theta=theta)
    r1 = nls_residual(p, S, TAU[None, :], method="fd4", step=0.02)
    r2 = nls_residual(p, S, TAU[None, :], method="fd4", step=0.01)
    assert r1 < 1e-5
    assert r2 < r1 / 8  # fourth order


def test_wrong_mu_is_not_a_solution():
    p = DarkSolitonParams(mu=1.0)
    assert not p.mu_consistent
    assert nls_residual(p, S, TAU[None, :]) > 0.5


def test_intensity_profile():
    p = DarkSolitonParams(A=1.2, g=0.8, theta=math.pi / 5)
    I = soliton_intensity(p, 0.0, TAU)
    assert np.allclose(I, np.abs(soliton_field(p, 0.0, TAU)) ** 2, rtol=1e-14)
    assert soliton_intensity(p, 0.0, 0.0) == pytest.approx(p.background * math.sin(p.theta) ** 2)
    assert soliton_intensity(p, 0.0, 60.0) == pytest.approx(p.background, rel=1e-12)


def test_dip_moves_at_velocity():
    p = DarkSolitonParams(theta=math.pi / 4, tau0=0.5)
    assert dip_position(p, 2.0) == pytest.approx(0.5 + 2.0 * p.velocity)
    assert p.velocity == pytest.approx(2 * math.sin(math.pi / 4))
    assert soliton_intensity(p, 2.0, dip_position(p, 2.0)) == pytest.approx(0.5)


@pytest.mark.parametrize("theta", [0.0, 0.3, 1.0, math.pi / 2])
def test_phase_jump(theta):
    p = DarkSolitonParams(theta=theta)
    ph = soliton_phase(p, 0.0, np.array([-40.0, 40.0]))
    assert ph[1] - ph[0] == pytest.approx(phase_jump(p), abs=1e-12)


def test_black_phase_at_centre():
    p = DarkSolitonParams()
    assert soliton_phase(p, 0.0, 0.0) == 0.0


def test_sample_field_broadcast():
    p = DarkSolitonParams(theta=0.4)
    fs = sample_field(p, S, TAU[None, :])
    assert fs.value.shape == (11, TAU.size)
    assert np.allclose(fs.intensity, soliton_intensity(p, S, TAU[None, :]))


def test_profile_dataset_rows():
    rows = profile_dataset([0.0, 0.5], count=11, span=3.0)
    assert len(rows) == 22
    assert {r[0] for r in rows} == {0.0, 0.5}


@pytest.mark.parametrize("theta", [-0.1, 2.0])
def test_theta_out_of_range(theta):
    with pytest.raises(ConfigError):
        DarkSolitonParams(theta=theta)


def test_negative_g_rejected():
    with pytest.raises(ConfigError):
        DarkSolitonParams(g=-1.0)


def test_with_keeps_mu_consistent():
    p = DarkSolitonParams().with_(A=2.0)
    assert p.mu == pytest.approx(8.0)
    q = DarkSolitonParams(mu=3.0).with_(A=2.0)
    assert q.mu == 3.0


def test_unknown_residual_method():
    with pytest.raises(ValueError):
        nls_residual(DarkSolitonParams(), 0.0, 0.0, method="euler")
