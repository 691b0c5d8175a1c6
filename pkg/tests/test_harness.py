import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from projkin.core import Grid
from projkin.harness import (
    ConvergenceTable,
    error_norms,
    imex_comparison,
    median_time,
    richardson_extrapolate,
    simulate,
    snapshot_run,
    spatial_convergence,
    speedup_bench,
    temporal_convergence,
)
from projkin.integrate import ProjectiveParams
from projkin.model import ParameterError
from projkin.problems import MissingExactSolution, catalog


def test_error_norms_scaling():
    g1 = Grid.uniform_1d(0.0, 1.0, 8)
    e = np.array([[2.0, -2.0, 4.0, 0.0, 0.0, 0.0, 0.0, 0.0]])
    assert error_norms(e, g1) == pytest.approx((1.0, np.sqrt(3.0), 4.0))
    g2 = Grid.uniform_2d((0.0, 2.0), (0.0, 2.0), 8, 8)
    assert error_norms(np.ones((1, 8, 8)), g2) == pytest.approx((4.0, 2.0, 1.0))


def test_table_orders_and_plateau():
    steps = [0.1, 0.05, 0.025, 0.0125]
    errs = [(8e-3, 8e-3, 8e-3), (1e-3, 1e-3, 1e-3), (1.25e-4, 1.25e-4, 1.25e-4), (1e-4, 1e-4, 1e-4)]
    t = ConvergenceTable.from_errors("space", steps, errs, plateau_threshold=1.1e-4)
    assert [r.plateau for r in t.rows] == [False, False, False, True]
    assert t.rows[0].orders == (None, None, None)
    np.testing.assert_allclose(t.local_orders("L2"), [3.0, 3.0])
    assert t.fitted_order("Linf") == pytest.approx(3.0)
    assert t.fitted_order("L1", pre_plateau=False) < 3.0


def test_table_rejects_negative_errors():
    with pytest.raises(ParameterError):
        ConvergenceTable.from_errors("time", [1.0], [(-1.0, 0.0, 0.0)])
    with pytest.raises(ParameterError):
        ConvergenceTable.from_errors("time", [1.0, 0.5], [(1.0, 1.0, 1.0)])


@given(st.lists(st.floats(1e-14, 1.0), min_size=3, max_size=6), st.floats(0.0, 1e-6))
def test_table_csv_round_trip(tmp_path_factory, errs, thr):
    steps = [2.0**-k for k in range(len(errs))]
    triples = [(e, 2 * e, 3 * e) for e in errs]
    t = ConvergenceTable.from_errors("space", steps, triples, thr)
    path = t.to_csv(tmp_path_factory.mktemp("csv") / "t.csv")
    back = ConvergenceTable.from_csv(path, "space", thr)
    assert back.to_rows() == t.to_rows()
    assert path.read_text() == back.to_csv(path.with_name("u.csv")).read_text()


@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10), st.integers(1, 4),
       st.floats(1e-3, 1e-1))
def test_richardson_identity(u_star, c, d, p, dt):
    # u(h) = u* + c h^p + d h^(p+1): extrapolation removes the leading term
    def u(h):
        return u_star + c * h**p + d * h ** (p + 1)

    est = richardson_extrapolate(u(dt), u(dt / 2), p)
    expected = u_star + d * dt ** (p + 1) * (1 - 2.0**p / 2 ** (p + 1)) / (1 - 2.0**p)
    assert est == pytest.approx(expected, rel=1e-9, abs=1e-12)


def test_richardson_closer_on_real_runs():
    sols = {}
    temporal_convergence("linear_diffusion", "rk3_ssp", [0.05, 0.025], cells=16, epsilon=1e-12,
                         t_end=0.5, keep_solutions=sols)
    u1, u2, u4 = sols[0.05], sols[0.025], sols[0.0125]
    est = richardson_extrapolate(u1, u2, 3)
    assert np.max(np.abs(est - u4)) < min(np.max(np.abs(u1 - u4)), np.max(np.abs(u2 - u4)))


@given(st.floats(1e-9, 1e-3), st.floats(3.5, 1e4), st.integers(0, 5))
def test_theoretical_speedup_identity(dt, ratio, K):
    ratio = max(ratio, K + 1)
    p = ProjectiveParams(dt, dt, ratio * dt, K)
    assert p.theoretical_speedup == p.Delta_t / (p.delta_t * (p.K + 1))


def test_table1_theoretical_factors():
    assert round(ProjectiveParams(1e-5, 1e-5, 5.1e-5, 2).theoretical_speedup, 2) == 1.70
    assert round(ProjectiveParams(1e-7, 1e-7, 5.13e-5, 2).theoretical_speedup) == 171


def test_spatial_convergence_deterministic_and_requires_exact():
    kw = dict(Delta_t=1e-5, epsilon=1e-8, t_end=1e-4)
    a = spatial_convergence(catalog("linear_diffusion"), 3, [16, 32], **kw)
    b = spatial_convergence(catalog("linear_diffusion"), 3, [16, 32], **kw)
    assert a.to_rows() == b.to_rows()
    assert a.plateau_threshold == pytest.approx(1e-7)
    with pytest.raises(MissingExactSolution):
        spatial_convergence(catalog("viscous_lwr"), 3, [16, 32], **kw)


def test_temporal_ladder_validation():
    with pytest.raises(ParameterError, match="halve"):
        temporal_convergence("linear_diffusion", "rk3_ssp", [0.05, 0.03], cells=16, epsilon=1e-12)
    with pytest.raises(ParameterError, match="M < 0"):
        temporal_convergence("linear_diffusion", "rk3_ssp", [4e-12, 2e-12], cells=16, epsilon=1e-12)


def test_temporal_zero_error_when_runs_coincide():
    # t_end = 0: both runs return the initial state
    t = temporal_convergence("linear_diffusion", "rk4", [0.02, 0.01], cells=16, epsilon=1e-12, t_end=0.0)
    assert np.all(t.errors("L1") == 0.0)


def test_speedup_row_identity():
    rows = speedup_bench("viscous_lwr", [1e-5], cells=50, t_end=2e-3, repeats=1)
    (r,) = rows
    assert r.real_factor == r.cpu_direct / r.cpu_pi
    assert r.theoretical_factor == r.Delta_t / (r.delta_t * (r.K + 1))
    assert not r.direct_estimated
    est = speedup_bench("viscous_lwr", [1e-7], cells=50, t_end=2e-3, repeats=1, direct_budget=1000,
                        probe_steps=500)
    assert est[0].direct_estimated and est[0].cpu_direct > 0


def test_imex_comparison_distance_first_order():
    kw = dict(cells=50, t_end=0.02, timed=False)
    d = [imex_comparison("viscous_lwr", [1e-6], Delta_t=Dt, **kw)[0].l1_distance for Dt in (4e-4, 2e-4)]
    assert d[1] < d[0] <= 5 * 4e-4
    assert 1.5 <= d[0] / d[1] <= 2.6
    again = imex_comparison("viscous_lwr", [1e-6], Delta_t=4e-4, **kw)[0].l1_distance
    assert again == d[0]


def test_median_time_counts_calls():
    calls = []
    median_time(lambda: calls.append(1), repeats=3)
    assert len(calls) == 4


def test_snapshot_files_and_manifest(tmp_path):
    res = snapshot_run("bl_gravity", tmp_path, cells=40, t_end=0.02, output_times=[0.01])
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["bl_gravity_mass.csv", "bl_gravity_t0.01.csv", "bl_gravity_t0.02.csv", "manifest.json"]
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["problem"]["name"] == "bl_gravity" and man["cells"] == [40]
    data = np.loadtxt(tmp_path / "bl_gravity_t0.02.csv", delimiter=",", skiprows=1)
    np.testing.assert_array_equal(data[:, 1], res.u[0])
    assert set(res.snapshots) == {0.01, 0.02}


def test_strongly_degenerate_bounded_and_inviscid_differs():
    viscous = simulate(catalog("burgers_strongly_degenerate"), 134, t_end=0.1, track_mass=True)
    inviscid = simulate(catalog("burgers_strongly_degenerate", xi=0.0), 134, t_end=0.1)
    for r in (viscous, inviscid):
        assert -1.0 - 1e-12 <= r.u.min() and r.u.max() <= 1.0 + 1e-12
    m = np.array([mm for _, mm in viscous.mass])
    assert np.ptp(m) <= 1e-8
    assert error_norms(viscous.u - inviscid.u, viscous.grid)[0] > 1e-4
