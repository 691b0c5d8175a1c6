import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from projkin.core import Grid
from projkin.integrate import TABLEAUX, TableauError, ButcherTableau
from projkin.model import build_drm1_1d
from projkin.spectral import (
    analytic_spectrum,
    bgk_symbol_matrix,
    count_components,
    dominant_eigenvalue_asymptotic,
    fourier_symbols,
    graded_axis,
    grid_modes,
    linear_maxwellian_weights,
    match_spectra,
    numerical_spectrum,
    pfe_amplification,
    prk_amplification,
    spectral_gap,
    stability_disks,
    stability_region,
)
from projkin.transport import STENCILS, SchemeSpec, advective_derivative

LAM, THETA = 2.0, math.sqrt(2.0)


def test_zero_mode_symbols():
    s = fourier_symbols(0.0, 0.1, LAM, THETA, 0.0, 1e-6)
    # symbols scale like 1/dx and 1/dx^2; at zeta = 0 only rounding remains
    for val, scale in ((s.alpha, 1 / 0.1), (s.beta, 1 / 0.1), (s.gamma, 1 / 0.1), (s.xi, 1 / 0.01)):
        assert abs(val) <= 1e-12 * scale


def test_symbols_at_pi():
    dx = 0.05
    s = fourier_symbols(math.pi, dx, LAM, THETA, 0.0, 1e-6)
    assert s.alpha == pytest.approx(-8 * LAM / (6 * dx), rel=1e-14)
    assert s.beta == pytest.approx(0.0, abs=1e-12)
    assert s.gamma == pytest.approx(0.0, abs=1e-6)


@pytest.mark.parametrize("kind,order", list(STENCILS))
def test_stencil_symbol_equals_fft_of_output(kind, order):
    n, dx = 32, 1.0 / 32
    j = np.arange(n)
    for k in range(n):
        z = 2 * math.pi * k / n
        mode = np.exp(1j * z * j)
        out = advective_derivative(order, 1.0, mode.real, dx, kind=kind) + 1j * advective_derivative(
            order, 1.0, mode.imag, dx, kind=kind)
        got = np.fft.fft(out)[k] / n
        assert abs(got - STENCILS[(kind, order)].symbol(z, dx)) <= 1e-12 * (1 / dx)


def test_centred_symbols_are_purely_imaginary():
    z = grid_modes(32)
    s = fourier_symbols(z, 1 / 32, LAM, THETA, 0.3, 1e-5)
    np.testing.assert_allclose(s.xi, 0.0, atol=1e-9)
    assert np.all(s.alpha <= 1e-12)


def test_symbol_matrix_structure():
    s = fourier_symbols(0.0, 0.1, LAM, THETA, 0.0, 1.0)
    Kmat = bgk_symbol_matrix(s)
    m = linear_maxwellian_weights(LAM, THETA)
    np.testing.assert_allclose(Kmat + np.eye(4), np.outer(m, np.ones(4)), atol=1e-14)
    assert np.min(np.abs(np.linalg.eigvals(Kmat))) <= 1e-14
    assert m.sum() == pytest.approx(1.0)


def test_secular_roots_match_dense_eigensolver(rng):
    for _ in range(50):
        z = rng.uniform(0, 2 * math.pi)
        eps = 10 ** rng.uniform(-8, -2)
        s = fourier_symbols(np.array([z]), 1 / 32, LAM, THETA, 0.0, eps)
        rep = analytic_spectrum(s)
        dense = np.linalg.eigvals(bgk_symbol_matrix(s)[0])
        scale = np.max(np.abs(dense))
        assert np.max(match_spectra(rep.eigenvalues[0], dense)) <= 1e-10 * scale


def test_zero_mode_dominant_is_conservation_mode():
    for eps in (1e-4, 1e-6):
        rep = analytic_spectrum(fourier_symbols(np.array([0.0]), 1 / 32, LAM, THETA, 0.0, eps))
        assert abs(rep.dominant[0]) <= 1e-6
        pred = dominant_eigenvalue_asymptotic(rep_symbols := fourier_symbols(0.0, 1 / 32, LAM, THETA, 0.0, eps))
        assert pred["z"] == pytest.approx(1.0)
        assert pred["kappa"] == pytest.approx(0.0)
        assert abs(rep_symbols.alpha) <= 1e-12 * 32


def test_expansion_remainder_is_second_order():
    z = grid_modes(32)[1:]
    rem = []
    for eps in (1e-5, 5e-6, 2.5e-6):
        s = fourier_symbols(z, 1 / 32, LAM, THETA, 0.0, eps)
        rep = analytic_spectrum(s)
        rem.append(np.max(np.abs(rep.dominant - rep.asymptotic_prediction)))
    assert 3.0 <= rem[0] / rem[1] <= 5.0
    assert 3.0 <= rem[1] / rem[2] <= 5.0


def test_expansion_leading_terms_large_theta_limit():
    s = fourier_symbols(np.array([0.7]), 1 / 32, LAM, 1e6, 0.0, 1e-6)
    pred = dominant_eigenvalue_asymptotic(s)
    assert pred["x1"][0] == pytest.approx(s.alpha[0], rel=1e-10)
    assert pred["y1"][0] == pytest.approx(s.beta[0] / LAM)


def test_fast_cluster_within_fitted_disk():
    for eps in (1e-5, 1e-6, 1e-7):
        rep = analytic_spectrum(fourier_symbols(grid_modes(32), 1 / 32, LAM, THETA, 0.0, eps))
        assert rep.within_bound
        assert rep.eigenvalues.shape == (32, 4)
        assert rep.C > 0


def test_spectral_gap_grows_like_inverse_eps():
    gaps = [spectral_gap(analytic_spectrum(fourier_symbols(grid_modes(32), 1 / 32, LAM, THETA, 0.0, e)))
            for e in (1e-5, 1e-6, 1e-7)]
    assert 8.0 <= gaps[1] / gaps[0] <= 12.0
    assert 8.0 <= gaps[2] / gaps[1] <= 12.0


def _linear_model(eps):
    return build_drm1_1d(LAM, THETA, 0.0, eps)


def test_numerical_spectrum_matches_modes():
    n, eps = 16, 1e-4
    grid = Grid.uniform_1d(0.0, 1.0, n)
    num = numerical_spectrum(_linear_model(eps), SchemeSpec(3, 4), grid)
    rep = analytic_spectrum(fourier_symbols(grid_modes(n), grid.dx, LAM, THETA, 0.0, eps))
    # the relaxation uses a mean-free residual; the analytic union is the reference
    dist = match_spectra(num.eigenvalues, rep.eigenvalues.ravel())
    assert np.max(dist) <= 1e-6 * np.max(np.abs(rep.eigenvalues))


def test_numerical_spectrum_independent_of_base_state(rng):
    grid = Grid.uniform_1d(0.0, 1.0, 8)
    m = _linear_model(1e-3)
    a = numerical_spectrum(m, SchemeSpec(3, 4), grid, rng.normal(size=(4, 1, 8)))
    b = numerical_spectrum(m, SchemeSpec(3, 4), grid, rng.normal(size=(4, 1, 8)))
    assert np.max(match_spectra(a.eigenvalues, b.eigenvalues)) <= 1e-8 * np.max(np.abs(a.eigenvalues))


def test_imaginary_extent_scales_like_inverse_sqrt_eps():
    grid = Grid.uniform_1d(0.0, 1.0, 16)
    im = [np.max(np.abs(numerical_spectrum(_linear_model(e), SchemeSpec(3, 4), grid).eigenvalues.imag))
          for e in (1e-4, 5e-5)]
    assert im[1] / im[0] == pytest.approx(math.sqrt(2.0), rel=0.05)


# --- amplification ---------------------------------------------------------------

def test_pfe_amplification_fixed_points():
    assert pfe_amplification(1.0, 10.0, 1.0, 2) == pytest.approx(1.0)
    assert pfe_amplification(0.0, 10.0, 1.0, 2) == 0.0


@given(st.sampled_from(list(TABLEAUX)), st.floats(3.0, 1e4), st.integers(0, 4))
def test_prk_consistency_at_tau_one(name, ratio, K):
    if ratio < K + 1:
        ratio = K + 1.0
    assert prk_amplification(1.0, name, ratio, 1.0, K) == pytest.approx(1.0, abs=1e-12)


@given(st.complex_numbers(max_magnitude=1.5, allow_nan=False), st.floats(3.0, 100.0), st.integers(0, 3))
def test_one_stage_prk_equals_pfe(tau, ratio, K):
    ratio = max(ratio, K + 1.0)
    a = prk_amplification(tau, "euler", ratio, 1.0, K)
    b = pfe_amplification(tau, ratio, 1.0, K)
    assert abs(a - b) <= 1e-12 * max(1.0, abs(b))


def test_prk_rejects_zero_node():
    bad = ButcherTableau.__new__(ButcherTableau)
    object.__setattr__(bad, "name", "bad")
    object.__setattr__(bad, "a", np.zeros((2, 2)))
    object.__setattr__(bad, "b", np.array([0.5, 0.5]))
    object.__setattr__(bad, "c", np.array([0.0, 0.0]))
    with pytest.raises(TableauError):
        prk_amplification(0.5, bad, 10.0, 1.0, 2)


def _disk_samples(centre, radius, n, rng):
    r = radius * np.sqrt(rng.uniform(0, 1, n))
    a = rng.uniform(0, 2 * math.pi, n)
    return centre + r * np.exp(1j * a)


@given(st.floats(5.0, 1e4), st.integers(1, 4), st.integers(0, 2**31))
def test_first_disk_is_stable(ratio, K, seed):
    (c1, r1), _ = stability_disks(ratio, K)
    tau = _disk_samples(c1, r1, 2000, np.random.default_rng(seed))
    assert np.max(np.abs(pfe_amplification(tau, ratio, 1.0, K))) <= 1 + 1e-12


@given(st.floats(5.0, 1e4), st.integers(1, 4), st.integers(0, 2**31))
def test_second_disk_stable_iff_radius_condition(ratio, K, seed):
    # worst point of D(0, R) is tau = -R, where |sigma| = ((M+1) R + M) R^K;
    # with R^K = 1/ratio this is <= 1 exactly when R <= (K+1)/(ratio-K)
    _, (c2, R) = stability_disks(ratio, K)
    tau = _disk_samples(c2, R, 2000, np.random.default_rng(seed))
    worst = np.max(np.abs(pfe_amplification(np.append(tau, -R), ratio, 1.0, K)))
    if R <= (K + 1) / (ratio - K):
        assert worst <= 1 + 1e-12
    else:
        assert worst <= 1 + R + 1e-12  # containment only as ratio -> infinity


@pytest.mark.parametrize("name", ["rk3_ssp", "rk4"])
@pytest.mark.parametrize("ratio", [10.0, 1e2, 1e4])
def test_prk_stable_on_both_disks(name, ratio, rng):
    for c, r in stability_disks(ratio, 2):
        tau = _disk_samples(c, r, 5000, rng)
        assert np.max(np.abs(prk_amplification(tau, name, ratio, 1.0, 2))) <= 1 + 1e-12


def test_region_contains_both_disks_at_ratio_10(rng):
    ratio, K = 10.0, 2
    raster = stability_region("pfe", ratio, K, resolution=256)
    assert raster.stable.shape == (256, 256)
    for c, r in stability_disks(ratio, K):
        tau = _disk_samples(c, r, 4000, rng)
        assert np.all(np.abs(pfe_amplification(tau, ratio, 1.0, K)) <= 1 + 1e-12)
    assert raster.contour_points().size > 0
    with pytest.raises(Exception):
        stability_region("pfe", ratio, K, resolution=32)


def test_region_splits_into_two_components_at_large_ratio():
    ratio, K = 1e4, 2
    (c1, r1), (c2, r2) = stability_disks(ratio, K)
    re = graded_axis(-1.2, 1.2, 257, [(c1 - 1.5 * r1, c1 + 1.5 * r1, 201), (-1.5 * r2, 1.5 * r2, 201)])
    im = graded_axis(-1.2, 1.2, 257, [(-1.5 * r1, 1.5 * r1, 201), (-1.5 * r2, 1.5 * r2, 201)])
    raster = stability_region("pfe", ratio, K, re_axis=re, im_axis=im)
    assert raster.n_components == 2
    assert count_components(np.zeros((4, 4), bool)) == 0


def test_tau_one_on_boundary():
    assert abs(pfe_amplification(1.0, 1e4, 1.0, 2)) == 1.0
