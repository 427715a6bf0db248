import math

import mpmath as mp
import numpy as np
import pytest
import sympy as sp

from darksqueeze.bdg import (BdGContext, SigmaGrid, analytic_fourier_integrals, apply_L,
                             continuous_mode, count_zero_modes, eigenvalue_minus, eigenvalue_plus,
                             inner_product, partner_mode, taper, zero_mode)
from darksqueeze.bdg.certify import (CertifyConfig, residual_continuous, residual_zero)
from darksqueeze.bdg.fourier import fourier_sech2, fourier_tanh, fourier_tanh_sech2
from darksqueeze.bdg.modes import RAW_ZERO_NORM, mode_coefficients, phi_zero, psi_zero
from darksqueeze.bdg.operator import (SIGMA3, adjoint_identity_discrepancy,
                                      pseudo_hermiticity_discrepancy, random_smooth_pairs,
                                      sample_pair, spectral_derivative)
from darksqueeze.bdg.overlaps import (CompletenessGrid, completeness_check, smooth_window,
                                      wavepacket_orthonormality)
from darksqueeze.errors import KFloorError, QuadratureError, ResolutionError

GAMMAS = (0.0, math.tan(math.pi / 6), math.tan(math.pi / 3))
CFG = CertifyConfig()


# -- symbolic oracle ----------------------------------------------------------
# With T = tanh(sigma), d/dsigma acts on f(T) as (1 - T^2) d/dT and on
# e^{ik sigma} f(T) as e^{ik sigma} (ik + (1 - T^2) d/dT) f.

T, gam = sp.symbols("T gamma", real=True)


def _sym_L(u, v, k=0):
    d = lambda f: sp.I * k * f + (1 - T ** 2) * sp.diff(f, T)
    m0 = 4 * T ** 2 - 2 + 2 * gam ** 2
    n = (T + sp.I * gam) ** 2
    nbar = (T - sp.I * gam) ** 2
    top = -d(d(u)) + m0 * u + 2 * sp.I * gam * d(u) + 2 * n * v
    bot = -2 * nbar * u + d(d(v)) - m0 * v + 2 * sp.I * gam * d(v)
    return sp.expand(top), sp.expand(bot)


def test_symbolic_translation_mode():
    psi = 1 - T ** 2
    top, bot = _sym_L(psi, psi)
    assert top == 0 and bot == 0


def test_symbolic_jordan_partner():
    # sigma sech^2 is not a function of T; carry it as a symbol y with y' = sech^2 - 2 T y
    y = sp.symbols("y")
    phi = (1 + sp.I * gam * (T + y * (1 - T ** 2))) / 2
    phibar = (1 - sp.I * gam * (T + y * (1 - T ** 2))) / 2

    def d(f):
        return sp.diff(f, T) * (1 - T ** 2) + sp.diff(f, y) * 1

    # d/dsigma of sigma is 1: f(T, sigma) with sigma -> y
    m0 = 4 * T ** 2 - 2 + 2 * gam ** 2
    n = (T + sp.I * gam) ** 2
    nbar = (T - sp.I * gam) ** 2
    u, v = sp.I * phi, -sp.I * phibar
    top = -d(d(u)) + m0 * u + 2 * sp.I * gam * d(u) + 2 * n * v
    bot = -2 * nbar * u + d(d(v)) - m0 * v + 2 * sp.I * gam * d(v)
    psi = 1 - T ** 2
    assert sp.expand(top + sp.I * psi) == 0
    assert sp.expand(bot + sp.I * psi) == 0


@pytest.mark.parametrize("g_val,k_val", [(0, sp.Rational(1, 2)), (sp.Rational(1, 2), 2),
                                         (1, sp.Rational(-3, 2))])
def test_symbolic_continuous_mode(g_val, k_val):
    nu = sp.sqrt(k_val ** 2 + 4 * (1 + g_val ** 2))
    eps = sp.sign(k_val) * nu - 2 * g_val
    alpha, beta = (eps + k_val) / 2, (eps - k_val) / 2
    u = (T - sp.I * alpha) ** 2
    v = (T + sp.I * beta) ** 2
    top, bot = _sym_L(u, v, k_val)
    E = k_val * eps
    assert sp.simplify((top - E * u).subs(gam, g_val)) == 0
    assert sp.simplify((bot - E * v).subs(gam, g_val)) == 0


# -- spectral operator --------------------------------------------------------

@pytest.mark.parametrize("gamma", GAMMAS)
@pytest.mark.parametrize("k", [0.5, 1.0, 2.0, 5.0, -1.0])
def test_continuous_residual(gamma, k):
    assert residual_continuous(CFG, gamma, k) < 1e-8


@pytest.mark.parametrize("gamma", GAMMAS)
def test_translation_and_jordan_residuals(gamma):
    assert residual_zero(CFG, gamma, "translation") < 1e-9
    assert residual_zero(CFG, gamma, "jordan") < 1e-9


@pytest.mark.parametrize("gamma", GAMMAS)
def test_zero_vector_is_generalized(gamma):
    # (u1, v1) = (Z - iG)/2 and L (u1, v1) = -Z/2, so the residual is 1/2
    x = CFG.grid.points
    zm = zero_mode(gamma)
    f = sample_pair(zm.pair.right, CFG.grid)
    combo = (zm.translation(x) - 1j * zm.generalized(x)) / 2
    assert np.max(np.abs(f - combo)) < 1e-15
    ctx = BdGContext(gamma, 1.0, CFG.grid)
    w = taper(CFG.grid)
    r = apply_L(ctx, f * w) + zm.translation(x) * w / 2
    assert np.max(np.abs(r[:, CFG.grid.interior(0.8)])) < 1e-9
    assert residual_zero(CFG, gamma, "vector") == pytest.approx(0.5, rel=1e-3)


@pytest.mark.parametrize("gamma", GAMMAS)
def test_pseudo_hermiticity(gamma):
    ctx = BdGContext(gamma, 1.0, CFG.grid)
    fs = random_smooth_pairs(ctx, 10, np.random.default_rng(1))
    assert pseudo_hermiticity_discrepancy(ctx, fs) < 1e-12
    assert adjoint_identity_discrepancy(ctx, list(zip(fs[:5], fs[5:]))) < 1e-12


def test_sigma3_conjugation_of_L():
    # L^dagger = sigma3 L sigma3 against an explicit matrix transpose
    grid = SigmaGrid(20.0, 64)
    ctx = BdGContext(0.4, 1.0, grid)
    n = grid.count
    basis = np.eye(2 * n, dtype=complex).reshape(2 * n, 2, n)
    L = np.stack([apply_L(ctx, b, check=False).reshape(-1) for b in basis], axis=1)
    Ld = np.stack([apply_L(ctx, b, adjoint=True, check=False).reshape(-1) for b in basis], axis=1)
    S = np.kron(SIGMA3, np.eye(n))
    assert np.max(np.abs(L.conj().T - Ld)) < 1e-9 * np.max(np.abs(L))
    assert np.max(np.abs(Ld - S @ L @ S)) < 1e-9 * np.max(np.abs(L))


def test_under_resolved_grid_raises():
    grid = SigmaGrid(40.0, 64)
    f = np.vstack([np.exp(-grid.points ** 2 / 0.01)] * 2)
    with pytest.raises(ResolutionError):
        spectral_derivative(f, grid)


def test_taper_is_one_inside():
    w = taper(CFG.grid)
    inner = CFG.grid.interior(0.8)
    assert np.all(w[inner] == 1.0)
    assert w[0] < 1e-10


# -- dispersion ----------------------------------------------------------------

@pytest.mark.parametrize("gamma", GAMMAS)
def test_eigenvalue_branches(gamma):
    k = np.linspace(0.01, 8, 50)
    ep = eigenvalue_plus(gamma, k)
    assert np.all(ep > 0)
    assert np.allclose(ep, k * np.sqrt(k ** 2 + 4 * (1 + gamma ** 2)) - 2 * gamma * k)
    assert np.allclose(eigenvalue_minus(gamma, k), -eigenvalue_plus(gamma, -k))


def test_partner_mode_has_negative_eigenvalue():
    pair = continuous_mode(0.3, 1.5)
    partner = partner_mode(pair)
    assert partner.eigenvalue == -pair.eigenvalue
    grid = CFG.grid
    ctx = BdGContext(0.3, 1.0, grid)
    f = sample_pair(partner, grid, taper(grid))
    r = apply_L(ctx, f) - partner.eigenvalue * f
    assert np.max(np.abs(r[:, grid.interior(0.8)])) < 1e-8


def test_k_floor():
    with pytest.raises(KFloorError):
        continuous_mode(0.0, 1e-4)
    with pytest.raises(KFloorError):
        analytic_fourier_integrals(0.0)


# -- normalisation ------------------------------------------------------------

@pytest.mark.parametrize("gamma", GAMMAS)
def test_zero_mode_norm(gamma):
    zm = zero_mode(gamma)
    assert inner_product(zm.pair.left, zm.pair.right).value == pytest.approx(1.0, abs=1e-12)
    raw = zero_mode(gamma, normalized=False)
    assert inner_product(raw.pair.left, raw.pair.right).value == pytest.approx(RAW_ZERO_NORM,
                                                                               abs=1e-12)


@pytest.mark.parametrize("gamma", GAMMAS)
@pytest.mark.parametrize("k", [0.5, 1.0, 2.0, -1.5])
def test_zero_continuum_biorthogonality(gamma, k):
    zm = zero_mode(gamma)
    val = inner_product(zm.pair.left, continuous_mode(gamma, k).right).value
    assert abs(val) < 1e-8


def test_continuous_pair_product_is_rejected():
    a, b = continuous_mode(0.0, 1.0), continuous_mode(0.0, 2.0)
    with pytest.raises(QuadratureError):
        inner_product(a.left, b.right)


def test_wavepacket_delta_normalisation():
    f = smooth_window(2.0, 0.4)
    res = wavepacket_orthonormality(0.3, f, f)
    assert res.rel_error < 1e-6
    h = smooth_window(5.0, 0.4)
    cross = wavepacket_orthonormality(0.3, f, h)
    assert cross.abs_error < 1e-8


def test_mode_coefficients_normalisation():
    norm, alpha, beta, eps = mode_coefficients(0.5, 1.2)
    nu = math.sqrt(1.2 ** 2 + 4 * 1.25)
    assert eps == pytest.approx(nu - 1.0)
    assert norm == pytest.approx(1 / math.sqrt(2 * math.pi * 1.2 * nu * eps ** 2))
    assert alpha - beta == pytest.approx(1.2)


# -- Fourier integrals against mpmath -----------------------------------------

@pytest.mark.parametrize("k", [0.5, 1.0, 2.0])
def test_fourier_against_mpmath(k):
    mp.mp.dps = 30
    # sech^2 and tanh sech^2 decay; integrate on a finite interval
    sech2 = mp.quad(lambda x: mp.cos(k * x) * mp.sech(x) ** 2, [-60, 0, 60])
    tsech2 = mp.quad(lambda x: mp.sin(k * x) * mp.tanh(x) * mp.sech(x) ** 2, [-60, 0, 60])
    # tanh: PV part 2i/k plus the decaying remainder tanh - sign
    rest = 2 * mp.quad(lambda x: mp.sin(k * x) * (mp.tanh(x) - 1), [0, 60])
    tanh = 2 / mp.mpf(k) + rest
    assert abs(fourier_sech2(k) - complex(sech2)) < 1e-12
    assert abs(fourier_tanh_sech2(k) - 1j * complex(tsech2)) < 1e-12
    assert abs(fourier_tanh(k) - 1j * complex(tanh)) < 1e-12


@pytest.mark.parametrize("k", [0.5, 1.0, 2.0, -0.7])
def test_fourier_closed_forms(k):
    res = analytic_fourier_integrals(k)
    assert max(res.abs_errors) < 1e-10


# -- completeness and spectrum ------------------------------------------------

def test_completeness_with_refinement():
    coarse = CompletenessGrid(k_max=15.0, proj_count=1201, eval_count=101)
    f = lambda x: np.vstack([np.exp(-x ** 2 / 4), 1j * np.exp(-x ** 2 / 2)])
    a = completeness_check(0.0, [f], coarse)[0]
    b = completeness_check(0.0, [f], coarse.refined())[0]
    assert a.error < 5e-2
    assert b.error < a.error


@pytest.mark.parametrize("gamma", [0.0, 0.5])
def test_zero_mode_count(gamma):
    res = count_zero_modes(gamma, half_width=12.0, n=160)
    assert res.independent == 1
    assert res.algebraic == 2  # Jordan block of length two
    assert res.min_singular < 1e-8


def test_zero_mode_profiles():
    x = np.linspace(-5, 5, 11)
    zm = zero_mode(0.2)
    assert np.allclose(zm.psi(x), psi_zero(x) / math.sqrt(2))
    assert np.allclose(zm.phi(x), phi_zero(0.2, x) / math.sqrt(2))
