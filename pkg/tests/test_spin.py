import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from darksqueeze.dynamics import ZeroModeGaussianState, min_ratio
from darksqueeze.errors import LinearizationError
from darksqueeze.medium import AtomicSystemParams, kerr_chain, medium_coefficients
from darksqueeze.soliton import DarkSolitonParams
from darksqueeze.spin import (SpinModel, min_spin_squeezing, min_spin_squeezing_search,
                              monte_carlo_spin_variance, raw_spin_variance, spin_quadrature_stats,
                              spin_squeezing_curve)

REF = AtomicSystemParams.reference()


@pytest.fixture(scope="module")
def model():
    return SpinModel.from_medium(REF)


def test_kappa_from_chain(model):
    c = medium_coefficients(REF)
    kappa = kerr_chain(REF).a21_1 * math.sqrt(c.gp_sq * c.n0)
    assert model.kappa == pytest.approx(kappa, rel=1e-14)
    assert model.population_z == pytest.approx(0.5 - abs(kappa) ** 2 * c.g, rel=1e-14)


def test_kappa_independent_of_volume():
    a = SpinModel.from_medium(REF)
    b = SpinModel.from_medium(REF.replace(quantization_volume=3e-3))
    assert b.kappa == pytest.approx(a.kappa, rel=1e-12)


def test_no_squeezing_at_start(model):
    assert min_spin_squeezing(model, 0.0) == 1.0


def test_squeezed_for_positive_s(model):
    s = np.linspace(0.01, 1, 100)
    xi = np.array([min_spin_squeezing(model, x) for x in s])
    assert np.all(xi < 1)
    assert np.all(np.diff(xi) <= 0)


def test_vacuum_variance_is_css_level(model):
    th = np.linspace(0, math.pi, 7)
    _, var = spin_quadrature_stats(model, 0.0, th)
    assert np.allclose(var, model.population_z / 2, rtol=1e-14)


def test_no_nonlinearity_means_no_squeezing():
    sol = DarkSolitonParams(g=0.0)
    m = SpinModel(kappa=0.4 + 0j, population_z=0.5, soliton=sol)
    for s in (0.0, 0.5, 1.0):
        assert min_spin_squeezing(m, s) == 1.0


def test_grey_limit_has_no_squeezing():
    m = SpinModel.from_medium(REF, soliton=DarkSolitonParams(theta=math.pi / 2))
    assert min_spin_squeezing(m, 1.0) == 1.0


@pytest.mark.parametrize("s", [0.1, 0.5, 1.0])
def test_matches_light_minimum_for_two_dimensional_response(model, s):
    # the window response spans both quadratures, so xi^2 equals the light R_min
    c0 = model.soliton.prefactor
    assert min_spin_squeezing(model, s) == pytest.approx(float(min_ratio(s, c0)), rel=1e-9)


@pytest.mark.parametrize("s", [0.2, 0.5, 0.9])
def test_angle_matches_search(model, s):
    xi, th = min_spin_squeezing(model, s, return_angle=True)
    xi2, th2 = min_spin_squeezing_search(model, s)
    d = abs(th - th2)
    assert min(d, math.pi - d) < 1e-7
    assert xi == pytest.approx(xi2, rel=1e-10)


def test_monte_carlo(model):
    est, exact, se = monte_carlo_spin_variance(model, 0.5, math.pi / 4, n=10 ** 5, seed=2)
    assert abs(est - exact) < 3 * se


@given(st.floats(0.0, 1.0), st.floats(0.0, math.pi), st.floats(1.1, 4.0))
def test_doubling_covariance_scales_variance(s, theta, f):
    m = SpinModel.from_medium(REF)
    state = ZeroModeGaussianState.vacuum().scaled(f)
    a = raw_spin_variance(m, s, theta)
    b = raw_spin_variance(m, s, theta, state=state)
    assert b == pytest.approx(f * a, rel=1e-12)


def test_curve_rows(model):
    rows = spin_squeezing_curve(model, [0.0, 0.5])
    assert rows[0] == (0.0, 1.0, 0.0)
    assert rows[1][2] < 0


def test_linearisation_bound():
    with pytest.raises(LinearizationError):
        SpinModel(kappa=0.6 + 0j, population_z=0.1, soliton=DarkSolitonParams())


def test_window_width_does_not_change_minimum():
    # any window whose response spans both quadratures gives the same minimum
    xs = [min_spin_squeezing(SpinModel.from_medium(REF, window=w), 1.0) for w in (0.5, 1.0, 5.0)]
    assert xs == pytest.approx([xs[0]] * 3, rel=1e-12)
