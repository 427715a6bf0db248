import math
import warnings

import numpy as np
import pytest

from darksqueeze.bdg import SigmaGrid, continuous_mode
from darksqueeze.errors import StepSizeError
from darksqueeze.oracles import (PropagationConfig, check_interior, continuous_mode_phase_check,
                                 convergence_order, linearized_evolution, mirror_coordinate,
                                 mirrored_soliton, propagate_nls, soliton_propagation_check,
                                 zero_mode_drift)
from darksqueeze.soliton import DarkSolitonParams

CFG = PropagationConfig()


def test_mirror_coordinate_is_continuous():
    L = 10.0
    x = np.linspace(-L, L, 2001)
    m = mirror_coordinate(x, L)
    assert np.max(np.abs(np.diff(m))) <= (x[1] - x[0]) * 1.0000001
    assert m[0] == pytest.approx(0.0) and m[-1] == pytest.approx(0.0)
    assert np.all(np.abs(m) <= L / 2)


@pytest.mark.parametrize("theta", [math.pi / 6, math.pi / 4])
def test_grey_velocity(theta):
    p = DarkSolitonParams(theta=theta)
    res = soliton_propagation_check(p, CFG, s_final=1.0)
    assert res.velocity_error / res.expected_velocity < 1e-2
    assert res.max_error < 1e-4
    assert res.edge_deviation < 1e-4
    assert res.power_drift < 1e-6


def test_black_soliton_is_stationary():
    p = DarkSolitonParams()
    res = soliton_propagation_check(p, CFG, s_final=1.0)
    assert res.intensity_error < 1e-6
    assert abs(res.velocity) < 1e-8


def test_strang_is_second_order():
    p = DarkSolitonParams(theta=math.pi / 6)
    u0 = mirrored_soliton(p, PropagationConfig(40.0, 512, 0.02))
    order = convergence_order(u0, p.g, p.mu, PropagationConfig(40.0, 512, 0.02), 0.4)
    assert order == pytest.approx(2.0, abs=0.1)


def test_step_size_guard():
    p = DarkSolitonParams(A=3.0)
    with pytest.raises(StepSizeError):
        propagate_nls(mirrored_soliton(p, CFG), p.g, p.mu, PropagationConfig(ds=0.01), 0.1)


def test_s_final_must_be_a_multiple_of_ds():
    p = DarkSolitonParams()
    with pytest.raises(ValueError):
        propagate_nls(mirrored_soliton(p, CFG), p.g, p.mu, CFG, 0.0015)


def test_dip_leaving_interior_is_rejected():
    with pytest.raises(ValueError):
        check_interior(DarkSolitonParams(theta=1.2), CFG, s_final=10.0)


def test_edge_warning_for_wrong_background():
    p = DarkSolitonParams()
    with pytest.warns(RuntimeWarning, match="edge"):
        propagate_nls(mirrored_soliton(p, CFG), p.g, p.mu, CFG, 0.05, background=0.5)


def test_zero_mode_secular_drift():
    coef, expected = zero_mode_drift(1.0)
    assert abs(coef - expected) / abs(expected) < 1e-5


def test_continuous_mode_phase_rotation():
    res = continuous_mode_phase_check(0.0, 1.0, 1.0, s_values=(0.1, 0.3))
    assert np.max(res.deviation) < 1e-2
    assert np.max(res.phase_error) < 1e-4


def test_continuous_mode_phase_rotation_moving_frame():
    res = continuous_mode_phase_check(math.tan(math.pi / 6), 1.0, 0.75, s_values=(0.2,))
    assert np.max(res.deviation) < 1e-2


def test_zero_seed_stays_zero():
    grid = SigmaGrid(20.0, 256)
    f = linearized_evolution(np.zeros((2, 256), complex), 0.3, 1.0, grid, 0.1)
    assert not np.any(f)


def test_linear_evolution_is_linear():
    grid = SigmaGrid(30.0, 512)
    x = grid.points
    a = np.vstack([np.exp(-x ** 2), 1j * np.exp(-(x - 1) ** 2)])
    b = np.vstack([np.exp(-(x + 2) ** 2), np.exp(-x ** 2 / 2)])
    fa = linearized_evolution(a, 0.2, 1.0, grid, 0.05, ds=1e-3)
    fb = linearized_evolution(b, 0.2, 1.0, grid, 0.05, ds=1e-3)
    fab = linearized_evolution(2 * a - 3j * b, 0.2, 1.0, grid, 0.05, ds=1e-3)
    assert np.max(np.abs(fab - (2 * fa - 3j * fb))) < 1e-12


def test_linear_evolution_conserves_pseudo_norm():
    # <sigma3 f, f> is invariant under a pseudo-Hermitian generator
    grid = SigmaGrid(30.0, 512)
    x = grid.points
    f0 = np.vstack([np.exp(-x ** 2 + 1j * x), 0.3 * np.exp(-(x - 1) ** 2)])
    f = linearized_evolution(f0, 0.4, 1.0, grid, 0.2, ds=1e-3)
    n0 = np.sum(np.abs(f0[0]) ** 2 - np.abs(f0[1]) ** 2)
    n1 = np.sum(np.abs(f[0]) ** 2 - np.abs(f[1]) ** 2)
    assert n1 == pytest.approx(n0, rel=1e-10)


def test_large_amplitude_warns():
    grid = SigmaGrid(20.0, 256)
    pair = continuous_mode(0.0, 1.0)
    f0 = np.vstack([pair.right.u(grid.points), pair.right.v(grid.points)])
    with pytest.warns(RuntimeWarning, match="1%"):
        linearized_evolution(f0, 0.0, 1.0, grid, 0.01, amplitude=1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        linearized_evolution(f0, 0.0, 1.0, grid, 0.01, amplitude=1e-3)
