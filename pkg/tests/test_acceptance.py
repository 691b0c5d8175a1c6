"""Acceptance criteria 1-8, each reported as a single PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

from projkin.harness import (
    _exact_averages,
    error_norms,
    simulate,
    spatial_convergence,
    speedup_bench,
    imex_comparison,
    temporal_convergence,
)
from projkin.integrate import ProjectiveParams, pfe_step, prk_step, TABLEAUX
from projkin.model import (
    build_drm1_1d,
    build_drm1_2d,
    build_drm2_1d,
    build_ovm_1d,
    check_mmf,
    identity_map,
    maxwellian,
    moment_residuals,
    project,
    zero_map,
)
from projkin.problems import catalog
from projkin.spectral import (
    analytic_spectrum,
    fourier_symbols,
    graded_axis,
    grid_modes,
    pfe_amplification,
    prk_amplification,
    stability_disks,
    stability_region,
)

pytestmark = pytest.mark.slow


def _cubic_B(u):
    u = np.asarray(u)
    return 0.1 * (u + u**3 / 3.0)


def _burgers(u):
    return 0.5 * np.asarray(u) ** 2


def test_criterion_1_moment_conditions(acceptance, rng):
    t0 = time.perf_counter()
    models = [
        build_drm1_1d(2.0, 1.5, 0.3, 1e-6, _burgers, _cubic_B),
        build_drm2_1d(-1.5, 2.5, 1.5, 0.0, 1e-6, _burgers, _cubic_B),
        build_ovm_1d(1.0, 1.5, 1e-6, _burgers, _cubic_B),
        build_drm1_2d(2.0, 3.0, 1.5, 0.2, 1e-6, _burgers, np.sin, _cubic_B),
    ]
    u = rng.uniform(-2.0, 2.0, size=(1, 1000))
    worst = 0.0
    for m in models:
        M = maxwellian(m, u)
        worst = max(worst, float(np.max(np.abs(project(M) - u) / (1 + np.abs(u)))))
        worst = max(worst, moment_residuals(m, u)["M3"])
    mmf = [
        check_mmf(build_drm1_1d(2.0, math.sqrt(2.0), 0.0, 1e-3), (0.0, 1.0), 101).is_mmf is True,
        check_mmf(build_drm1_1d(1.0, 1.0, 0.0, 1e-3), (0.0, 1.0), 101).is_mmf is False,
        check_mmf(build_drm1_1d(0.1, 0.1, 0.0, 1e-3, zero_map, zero_map), (-5.0, 5.0), 51).is_mmf is True,
        abs(check_mmf(build_drm1_2d(2.0, 2.0, 2.0, 0.0, 1e-3, zero_map, zero_map, identity_map),
                      (0.0, 1.0), 11).max_condition_value - 0.25) <= 1e-9,  # finite-difference derivatives
    ]
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and all(mmf) and elapsed < 1.0
    acceptance(1, "moment conditions", ok,
               f"max relative residual {worst:.3g}, MMF examples {sum(mmf)}/{len(mmf)}, {elapsed:.2f} s")


def test_criterion_2_spatial_order(acceptance):
    grids = [32, 64, 128, 256]
    kw = dict(Delta_t=1e-7, epsilon=1e-10, t_end=3e-3)
    lines, ok = [], True
    for order in (3, 4):
        table = spatial_convergence(catalog("linear_diffusion"), order, grids, **kw)
        fits = [table.fitted_order(n) for n in ("L1", "L2", "Linf")]
        ok &= all(abs(f - order) <= 0.3 for f in fits)
        lines.append(f"order {order}: fits " + "/".join(f"{f:.2f}" for f in fits))
        if order == 4:
            floor = float(table.errors("L1").min())
            ok &= floor <= 1e-9
            local = [r.orders[2] for r in table.rows[1:]]
            lines.append(f"floor {floor:.2g}; Linf local orders "
                         + "/".join(f"{o:.2f}" for o in local)
                         + f" (plateau flags {[r.plateau for r in table.rows]})")
    acceptance(2, "spatial order", ok, "; ".join(lines))


LADDERS = {
    "linear_diffusion": dict(cells=16, start=0.05, t_end=0.5),
    "advection_diffusion": dict(cells=16, start=0.002, t_end=0.02),
}


def test_criterion_3_temporal_order(acceptance):
    lines, ok = [], True
    for name, cfg in LADDERS.items():
        ladder = [cfg["start"] / 2**k for k in range(5)]
        for tableau, p in (("rk3_ssp", 3), ("rk4", 4)):
            table = temporal_convergence(name, tableau, ladder, cells=cfg["cells"], epsilon=1e-12,
                                         t_end=cfg["t_end"])
            orders = np.concatenate([table.local_orders(n) for n in ("L1", "L2", "Linf")])
            good = orders.size >= 6 and bool(np.all(np.abs(orders - p) <= 0.3))
            ok &= good
            lines.append(f"{name}/PRK{p}: {orders.min():.2f}..{orders.max():.2f} ({orders.size // 3} ratios)")
    acceptance(3, "temporal order", ok, "; ".join(lines))


def test_criterion_4_spectrum(acceptance):
    t0 = time.perf_counter()
    z = grid_modes(32)

    def report(eps, C=None):
        return analytic_spectrum(fourier_symbols(z, 1 / 32, 2.0, math.sqrt(2.0), 0.0, eps), C=C)

    C = report(1e-5).C
    ok, lines = True, [f"C = {C:.3g}"]
    for eps in (1e-5, 1e-6, 1e-7):
        rep = report(eps, C)
        half = report(eps / 2, C)
        r = [np.max(np.abs(x.dominant - x.asymptotic_prediction)) for x in (rep, half)]
        ratio = r[0] / r[1]
        good = rep.within_bound and rep.fast.shape == (32, 3) and abs(ratio - 4.0) <= 1.0
        ok &= good
        lines.append(f"eps={eps:g} inside={rep.within_bound} halving ratio {ratio:.3f}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 30
    acceptance(4, "spectrum", ok, "; ".join(lines) + f"; {elapsed:.1f} s")


def test_criterion_5_amplification(acceptance, rng):
    t0 = time.perf_counter()
    worst = 0.0
    for i in range(100):
        tau = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        K = int(rng.integers(0, 5))
        M = float(rng.uniform(0, 100))
        dt = 1e-3
        Dt = (M + K + 1) * dt
        lam = (tau - 1) / dt
        rhs = lambda y, lam=lam: lam * y  # noqa: E731
        name = ("euler", "rk2", "rk3_ssp", "rk4")[i % 4]
        p = ProjectiveParams(1.0, dt, Dt, K, tableau=TABLEAUX[name])
        y = prk_step(rhs, np.array([1.0 + 0j]), p)[0]
        want = prk_amplification(tau, name, Dt, dt, K)
        worst = max(worst, abs(y - want) / max(1.0, abs(want)))
        if name == "euler":
            y = pfe_step(rhs, np.array([1.0 + 0j]), p)[0]
            want = pfe_amplification(tau, Dt, dt, K)
            worst = max(worst, abs(y - want) / max(1.0, abs(want)))
    ratio, K = 1e4, 2
    (c1, r1), (c2, r2) = stability_disks(ratio, K)
    re = graded_axis(-1.2, 1.2, 257, [(c1 - 1.5 * r1, c1 + 1.5 * r1, 201), (-1.5 * r2, 1.5 * r2, 201)])
    im = graded_axis(-1.2, 1.2, 257, [(-1.5 * r1, 1.5 * r1, 201), (-1.5 * r2, 1.5 * r2, 201)])
    n = stability_region("pfe", ratio, K, re_axis=re, im_axis=im).n_components
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-13 and n == 2 and elapsed < 30
    acceptance(5, "amplification", ok, f"max scalar-run mismatch {worst:.2g}, components at 1e4: {n}, "
                                       f"{elapsed:.1f} s")


def test_criterion_6_speedup(acceptance):
    s1 = ProjectiveParams(1e-5, 1e-5, 5.1e-5, 2).theoretical_speedup
    s2 = ProjectiveParams(1e-7, 1e-7, 5.13e-5, 2).theoretical_speedup
    formula = round(s1, 2) == 1.70 and round(s2) == 171
    lo, hi = speedup_bench("viscous_lwr", [1e-5, 1e-7], repeats=3, direct_budget=200_000, probe_steps=20_000)
    trend = hi.real_factor / lo.real_factor
    within = 0.5 <= hi.real_factor / hi.theoretical_factor <= 2.0
    imex = imex_comparison("viscous_lwr", [1e-5, 1e-7], repeats=3)
    uniform = imex[1].cpu_pi / imex[0].cpu_pi
    ok = formula and within and trend >= 50 and 0.5 <= uniform <= 2.0
    acceptance(6, "speedup", ok,
               f"S_PI {s1:.3f}/{s2:.1f}; real {lo.real_factor:.2f} -> {hi.real_factor:.1f} "
               f"(theory {hi.theoretical_factor:.1f}, trend x{trend:.0f}); PI cpu ratio {uniform:.2f}")


def _mass(res):
    return np.array([m for _, m in res.mass])


def _boundary_balance(problem, res):
    """Mass change against the flux through the two boundaries with frozen end states."""
    u0 = np.asarray(problem.u0(res.grid.centers(0))).reshape(problem.K, -1)
    A = problem.flux[0]
    inflow = np.asarray(A(u0[:, :1])).reshape(problem.K) - np.asarray(A(u0[:, -1:])).reshape(problem.K)
    T = res.mass[-1][0]
    return float(np.max(np.abs(_mass(res)[-1] - _mass(res)[0] - T * inflow)))


def test_criterion_7_qualitative(acceptance):
    lines, ok = [], True
    shock = catalog("burgers_steady_shock")
    x_ref = _exact_averages(shock, shock.grid(), shock.t_end)
    hi = simulate(shock, scheme=4, tableau="rk4")
    lo = simulate(shock, scheme=1, tableau="euler")
    d_hi = float(np.max(np.abs(hi.u - x_ref)))
    d_lo = float(np.max(np.abs(lo.u - x_ref)))
    ok &= d_lo >= 2 * d_hi
    lines.append(f"shock Linf PRK4 {d_hi:.2g} vs order-1 {d_lo:.2g}")

    deg = simulate(catalog("burgers_strongly_degenerate"), track_mass=True)
    drift = float(np.ptp(_mass(deg)))
    bounded = -1.0 <= deg.u.min() and deg.u.max() <= 1.0
    ok &= bounded and drift <= 1e-8
    lines.append(f"degenerate range [{deg.u.min():.3f}, {deg.u.max():.3f}] drift {drift:.1g}")

    for name, opts in (("three_phase", {}), ("bl_gravity", {"g": 0.0}), ("bl_gravity", {"g": 5.0})):
        p = catalog(name, **opts)
        res = simulate(p, track_mass=True)
        finite = bool(np.all(np.isfinite(res.f)))
        bal = _boundary_balance(p, res)
        ok &= finite and bal <= 1e-8
        lines.append(f"{name}{opts or ''} finite={finite} balance {bal:.1g}")

    bl = simulate(catalog("bl_2d"), (100, 100))
    good = 0.0 <= bl.u.min() and bl.u.max() <= 1.0 + 1e-6
    ok &= good
    lines.append(f"bl_2d range [{bl.u.min():.2g}, {bl.u.max():.6f}]")
    acceptance(7, "qualitative benchmarks", ok, "; ".join(lines))


def test_criterion_8_consistency_sweep(acceptance):
    p = catalog("linear_diffusion")
    T = 1e-2
    errs = []
    for eps in (1e-6, 1e-7, 1e-8, 1e-9, 1e-10):
        r = simulate(p, 64, scheme=4, epsilon=eps, Delta_t=1e-5, tableau="rk4", t_end=T)
        errs.append(error_norms(r.u - _exact_averages(p, r.grid, T), r.grid))
    errs = np.array(errs)
    ok = bool(np.all(np.diff(errs, axis=0) <= 0.0))
    acceptance(8, "consistency sweep", ok,
               "L1 " + " >= ".join(f"{e:.5g}" for e in errs[:, 0]))
