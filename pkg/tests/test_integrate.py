import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from projkin.core import Grid, init_kinetic
from projkin.harness import error_norms
from projkin.integrate import (
    TABLEAUX,
    ButcherTableau,
    IntegrationError,
    ProjectiveParams,
    TableauError,
    direct_integrate,
    get_tableau,
    imex1_step,
    inner_euler,
    integrate_imex1,
    integrate_projective,
    pfe_step,
    prk_step,
    projective_step,
    select_parameters,
)
from projkin.model import ParameterError, build_drm1_1d, maxwellian, project
from projkin.problems import catalog
from projkin.spectral import pfe_amplification, prk_amplification
from projkin.transport import SchemeSpec, SemiDiscreteOperator


def dahlquist(lam):
    return lambda y: lam * y


def small_operator(eps=1e-4, n=8):
    g = Grid.uniform_1d(0.0, 1.0, n)
    m = build_drm1_1d(2.0, 1.5, 0.0, eps, lambda u: 0.5 * u * u)
    op = SemiDiscreteOperator(m, g, SchemeSpec(3, 4))
    f = init_kinetic(m, g, lambda x: 0.5 + 0.2 * np.sin(2 * np.pi * x))
    return m, g, op, f


# --- tableaux ----------------------------------------------------------------

@pytest.mark.parametrize("name", list(TABLEAUX))
def test_builtin_tableaux_are_convex(name):
    tab = TABLEAUX[name]
    assert tab.is_convex()
    assert tab.b.sum() == pytest.approx(1.0)


def test_tableau_lookup():
    assert get_tableau(4) is TABLEAUX["rk4"]
    assert get_tableau("PFE") is TABLEAUX["euler"]
    assert get_tableau("ssp3") is TABLEAUX["rk3_ssp"]
    with pytest.raises(TableauError):
        get_tableau("rk7")


def test_tableau_rejects_zero_node_beyond_first_stage():
    with pytest.raises(TableauError):
        ButcherTableau.from_rows("bad", [[0.0]], [0.5, 0.5], [0.0, 0.0])
    with pytest.raises(TableauError):
        ButcherTableau.from_rows("bad", [[1.0]], [0.4, 0.5], [0.0, 1.0])


# --- single steps ------------------------------------------------------------------

def test_inner_euler_examples():
    f = np.array([1.0, 2.0])
    np.testing.assert_array_equal(inner_euler(lambda y: 0 * y, f, 0.1), f)
    assert inner_euler(dahlquist(-3.0), np.array([1.0]), 0.1)[0] == pytest.approx(0.7)


def test_inner_step_with_dt_eps_is_maxwellian_minus_transport():
    m, g, op, f = small_operator()
    rng = np.random.default_rng(0)
    f = f + 1e-3 * rng.normal(size=f.shape)
    out = inner_euler(op, f, m.epsilon)
    expected = maxwellian(m, project(f)) - m.epsilon * op.transport_term(f)
    np.testing.assert_allclose(out, expected, rtol=1e-12, atol=1e-14)


def test_params_invariants():
    p = ProjectiveParams(1e-3, 1e-3, 5e-3, 2)
    assert p.M == pytest.approx(2.0)
    assert p.theoretical_speedup == pytest.approx(5.0 / 3.0)
    with pytest.raises(ParameterError):
        ProjectiveParams(1e-3, 1e-3, 2e-3, 2)
    with pytest.raises(ParameterError):
        ProjectiveParams(1e-3, 0.0, 2e-3, 2)


def test_select_parameters_example():
    p = select_parameters(1e-7, 5e-3, 2.05, K=2)
    assert p.delta_t == 1e-7
    assert p.Delta_t == pytest.approx(5.125e-5)
    assert round(p.M) == 510
    assert round(p.theoretical_speedup) == 171


def test_select_parameters_clamps_K_and_refuses_closed_gap():
    assert select_parameters(1e-7, 5e-3, 2.05, K=0).K == 2
    with pytest.raises(ParameterError, match="direct"):
        select_parameters(1e-3, 1e-2, 0.1, K=2)


def test_pfe_fixed_point_and_zero_extrapolation():
    p = ProjectiveParams(0.1, 0.1, 1.0, 2)
    f = np.array([2.0, -1.0])
    np.testing.assert_array_equal(pfe_step(lambda y: 0 * y, f, p), f)
    p0 = ProjectiveParams(0.1, 0.1, 0.3, 2)
    rhs = dahlquist(-2.0)
    res = pfe_step(rhs, f, p0, keep_inner=True)
    np.testing.assert_allclose(res.state, res.inner[-1], rtol=1e-15)
    np.testing.assert_allclose(res.state, f * 0.8**3, rtol=1e-14)


@pytest.mark.parametrize("name", list(TABLEAUX))
def test_prk_zero_rhs(name):
    p = ProjectiveParams(0.1, 0.1, 1.0, 2, tableau=TABLEAUX[name])
    f = np.array([0.5, 1.5])
    np.testing.assert_array_equal(prk_step(lambda y: 0 * y, f, p), f)


def test_prk_one_stage_bitwise_equals_pfe():
    m, g, op, f = small_operator()
    p = ProjectiveParams(m.epsilon, m.epsilon, 3e-3, 2, tableau=TABLEAUX["euler"])
    assert np.array_equal(prk_step(op, f, p), pfe_step(op, f, p))
    assert np.array_equal(projective_step(op, f, p), pfe_step(op, f, p))


@given(
    st.complex_numbers(max_magnitude=1.2, allow_nan=False, allow_infinity=False),
    st.integers(0, 4),
    st.floats(0.0, 50.0),
    st.sampled_from(list(TABLEAUX)),
)
def test_dahlquist_amplification_matches_closed_forms(tau, K, M, name):
    dt = 0.01
    lam = (tau - 1.0) / dt
    Dt = (M + K + 1) * dt
    p = ProjectiveParams(1.0, dt, Dt, K, tableau=TABLEAUX[name])
    y0 = np.array([1.0 + 0.0j])
    sigma = prk_step(dahlquist(lam), y0, p)[0]
    closed = prk_amplification(tau, name, Dt, dt, K)
    assert abs(sigma - closed) <= 1e-13 * max(1.0, abs(closed))
    if name == "euler":
        pf = pfe_step(dahlquist(lam), y0, p)[0]
        assert abs(pf - pfe_amplification(tau, Dt, dt, K)) <= 1e-13 * max(1.0, abs(pf))


def test_dahlquist_100_random_triples(rng):
    for _ in range(100):
        tau = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        K = int(rng.integers(0, 5))
        M = float(rng.uniform(0, 100))
        dt = 1e-3
        Dt = (M + K + 1) * dt
        lam = (tau - 1) / dt
        p = ProjectiveParams(1.0, dt, Dt, K)
        got = pfe_step(dahlquist(lam), np.array([1.0 + 0j]), p)[0]
        want = pfe_amplification(tau, Dt, dt, K)
        assert abs(got - want) <= 1e-13 * max(1.0, abs(want))


@pytest.mark.parametrize("name", list(TABLEAUX))
def test_projective_step_conserves_mass(name):
    m, g, op, f = small_operator(eps=1e-6, n=32)
    p = ProjectiveParams(1e-6, 1e-6, 1e-3, 2, tableau=TABLEAUX[name])
    out = projective_step(op, f, p)
    before = project(f).sum() * g.dx
    after = project(out).sum() * g.dx
    assert abs(after - before) <= 1e-10 * abs(before)


# --- whole runs ---------------------------------------------------------------------

def test_integrate_projective_lands_on_t_end_and_output_times():
    p = ProjectiveParams(1e-3, 1e-3, 0.03, 2)
    seen = []
    y = integrate_projective(lambda y: np.ones_like(y), np.zeros(1), 0.1001, p,
                             callback=lambda t, f: seen.append(t), output_times=[0.05])
    assert y[0] == pytest.approx(0.1001, rel=1e-12)
    assert 0.05 in seen and seen[-1] == 0.1001


def test_integrate_projective_short_remainder_uses_inner_steps():
    p = ProjectiveParams(1e-3, 1e-3, 0.01, 2)
    y = integrate_projective(lambda y: np.ones_like(y), np.zeros(1), 0.0115, p)
    assert y[0] == pytest.approx(0.0115, rel=1e-12)


def test_nan_aborts_with_step_index():
    p = ProjectiveParams(1e-3, 1e-3, 0.01, 2)
    with pytest.raises(IntegrationError) as info:
        integrate_projective(lambda y: np.full_like(y, np.nan), np.ones(1), 0.05, p)
    assert info.value.step == 1


def test_direct_examples():
    f = np.array([3.0])
    np.testing.assert_array_equal(direct_integrate(lambda y: 0 * y, f, 1.0, 0.1), f)
    one = direct_integrate(dahlquist(-1.0), f, 0.1, 0.1)
    np.testing.assert_allclose(one, inner_euler(dahlquist(-1.0), f, 0.1), rtol=1e-15)
    with pytest.raises(ParameterError, match="1e9"):
        direct_integrate(dahlquist(-1.0), f, 1.0, 1e-10)


def test_imex_equilibrium_and_weak_relaxation_limit():
    m, g, op, f = small_operator()
    eq = maxwellian(m, np.full((1, g.n_cells), 0.4))
    np.testing.assert_allclose(imex1_step(op, eq, 1e-3), eq, atol=1e-12)
    weak = replace(m, epsilon=1e12)
    op_weak = SemiDiscreteOperator(weak, g, SchemeSpec(3, 4))
    Dt = 1e-3
    out = imex1_step(op_weak, f, Dt)
    np.testing.assert_allclose(out, f - Dt * op_weak.transport_term(f), rtol=1e-9, atol=1e-12)


def _lwr_endpoints(eps, t_end=0.02):
    prob = catalog("viscous_lwr")
    g = prob.grid()
    m = prob.model(eps)
    op = SemiDiscreteOperator(m, g, prob.scheme, prob.boundary)
    f0 = init_kinetic(m, g, prob.u0)
    p = ProjectiveParams(eps, eps, prob.cfl_C * g.dx**2, 2)
    return g, op, f0, p, t_end


def test_direct_matches_pfe_on_lwr():
    g, op, f0, p, T = _lwr_endpoints(1e-5)
    u_pi = project(integrate_projective(op, f0, T, p))
    u_dir = project(direct_integrate(op, f0, T, p.delta_t))
    assert error_norms(u_pi - u_dir, g)[0] <= 5 * p.Delta_t


def test_imex_matches_pfe_on_lwr():
    g, op, f0, p, T = _lwr_endpoints(1e-7)
    u_pi = project(integrate_projective(op, f0, T, p))
    u_im = project(integrate_imex1(op, f0, T, p.Delta_t))
    assert error_norms(u_pi - u_im, g)[0] <= 5 * p.Delta_t
