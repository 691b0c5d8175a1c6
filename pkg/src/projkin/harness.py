"""Experiment drivers: convergence studies, speedup timing, IMEX comparison, snapshots."""

from __future__ import annotations

import csv
import json
import logging
import math
import statistics
import time
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .core import Grid, cell_averages, init_kinetic, total_mass, write_macro_csv
from .integrate import (
    ProjectiveParams,
    direct_integrate,
    get_tableau,
    integrate_imex1,
    integrate_projective,
)
from .model import ParameterError, project
from .problems import MissingExactSolution, Problem, catalog
from .transport import SchemeSpec, SemiDiscreteOperator

__all__ = [
    "ConvergenceRow",
    "ConvergenceTable",
    "SpeedupRow",
    "ImexRow",
    "RunResult",
    "error_norms",
    "simulate",
    "spatial_convergence",
    "temporal_convergence",
    "richardson_extrapolate",
    "speedup_bench",
    "imex_comparison",
    "snapshot_run",
    "median_time",
    "write_csv",
]

log = logging.getLogger(__name__)

NORMS = ("L1", "L2", "Linf")


def error_norms(err: np.ndarray, grid: Grid) -> tuple[float, float, float]:
    """Cell-sum L1/L2 norms scaled by the cell volume, and the max norm, over all components."""
    e = np.abs(np.asarray(err, dtype=float))
    vol = grid.cell_volume
    return float(e.sum() * vol), float(math.sqrt((e * e).sum() * vol)), float(e.max(initial=0.0))


def write_csv(path: str | Path, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> Path:
    """CSV with a header row; floats written with ``%.17g``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    def fmt(v: Any) -> str:
        if v is None:
            return ""
        if isinstance(v, (bool, np.bool_)):
            return "1" if v else "0"
        if isinstance(v, (float, np.floating)):
            return "%.17g" % float(v)
        return str(v)

    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


# ----------------------------------------------------------------------------
# convergence tables


@dataclass
class ConvergenceRow:
    step: float
    errors: tuple[float, float, float]
    orders: tuple[float | None, float | None, float | None] = (None, None, None)
    plateau: bool = False


@dataclass
class ConvergenceTable:
    """Errors against a resolution parameter (``dx`` or ``Delta_t``) with local orders.

    A row is flagged as plateau when its L1 error drops below
    ``plateau_threshold``; order fits skip plateau rows.
    """

    kind: str
    rows: list[ConvergenceRow]
    plateau_threshold: float = 0.0
    label: str = ""

    HEADER = ("step", "error_L1", "error_L2", "error_Linf", "order_L1", "order_L2", "order_Linf", "plateau")

    @classmethod
    def from_errors(cls, kind: str, steps: Sequence[float], errors: Sequence[Sequence[float]],
                    plateau_threshold: float = 0.0, label: str = "") -> "ConvergenceTable":
        steps = [float(s) for s in steps]
        errs = [tuple(float(x) for x in e) for e in errors]
        if len(steps) != len(errs):
            raise ParameterError("one error triple per resolution is required")
        for e in errs:
            if any(x < 0 or not math.isfinite(x) for x in e):
                raise ParameterError(f"errors must be finite and nonnegative, got {e}")
        rows = []
        for i, (h, e) in enumerate(zip(steps, errs)):
            orders: tuple[float | None, ...] = (None, None, None)
            if i > 0:
                orders = tuple(_local_order(errs[i - 1][k], e[k], steps[i - 1], h) for k in range(3))
            rows.append(ConvergenceRow(h, e, orders, bool(e[0] < plateau_threshold)))  # type: ignore[arg-type]
        return cls(kind, rows, plateau_threshold, label)

    @property
    def steps(self) -> np.ndarray:
        return np.array([r.step for r in self.rows])

    def errors(self, norm: str = "L1") -> np.ndarray:
        k = NORMS.index(norm)
        return np.array([r.errors[k] for r in self.rows])

    def local_orders(self, norm: str = "L1", *, pre_plateau: bool = True) -> np.ndarray:
        """Orders between consecutive rows (both rows pre-plateau when requested)."""
        k = NORMS.index(norm)
        out = []
        for prev, row in zip(self.rows[:-1], self.rows[1:]):
            if pre_plateau and (prev.plateau or row.plateau):
                continue
            out.append(row.orders[k])
        return np.array([o for o in out if o is not None], dtype=float)

    def fitted_order(self, norm: str = "L1", *, pre_plateau: bool = True) -> float:
        """Least-squares slope of ``log(error)`` against ``log(step)``."""
        mask = np.array([not (pre_plateau and r.plateau) for r in self.rows])
        h = self.steps[mask]
        e = self.errors(norm)[mask]
        keep = e > 0
        if keep.sum() < 2:
            return float("nan")
        slope = np.polyfit(np.log(h[keep]), np.log(e[keep]), 1)[0]
        return float(slope)

    def to_rows(self) -> list[list[Any]]:
        return [[r.step, *r.errors, *r.orders, r.plateau] for r in self.rows]

    def to_csv(self, path: str | Path) -> Path:
        return write_csv(path, self.HEADER, self.to_rows())

    @classmethod
    def from_csv(cls, path: str | Path, kind: str = "", plateau_threshold: float = 0.0) -> "ConvergenceTable":
        """Rebuild a table (recomputing orders and plateau flags) from a frozen CSV."""
        with Path(path).open(newline="") as fh:
            reader = csv.DictReader(fh)
            data = [(float(r["step"]), (float(r["error_L1"]), float(r["error_L2"]), float(r["error_Linf"])))
                    for r in reader]
        return cls.from_errors(kind, [d[0] for d in data], [d[1] for d in data], plateau_threshold)


def _local_order(e_coarse: float, e_fine: float, h_coarse: float, h_fine: float) -> float | None:
    if e_coarse <= 0 or e_fine <= 0 or h_coarse == h_fine:
        return None
    return math.log(e_coarse / e_fine) / math.log(h_coarse / h_fine)


# ----------------------------------------------------------------------------
# single runs


@dataclass
class RunResult:
    grid: Grid
    f: np.ndarray
    u: np.ndarray
    params: ProjectiveParams
    snapshots: dict[float, np.ndarray] = field(default_factory=dict)
    mass: list[tuple[float, np.ndarray]] = field(default_factory=list)


def _scheme(scheme: SchemeSpec | int | str | None, problem: Problem) -> SchemeSpec:
    if scheme is None:
        return problem.scheme
    if isinstance(scheme, SchemeSpec):
        return scheme
    if isinstance(scheme, str) and scheme.lower() == "cweno3":
        return SchemeSpec("cweno3", 2)
    return SchemeSpec.of_order(int(scheme))


def simulate(
    problem: Problem,
    cells: int | tuple[int, ...] | None = None,
    *,
    scheme: SchemeSpec | int | str | None = None,
    epsilon: float | None = None,
    Delta_t: float | None = None,
    delta_t: float | None = None,
    K: int = 2,
    tableau: str | int | None = None,
    cfl_C: float | None = None,
    t_end: float | None = None,
    output_times: Sequence[float] = (),
    model_overrides: dict[str, float] | None = None,
    track_mass: bool = False,
) -> RunResult:
    """Run one projective integration of a catalog problem.

    ``Delta_t`` defaults to ``cfl_C dx^2`` and ``delta_t`` to ``epsilon``.
    """
    eps = problem.epsilon if epsilon is None else float(epsilon)
    grid = problem.grid(cells)
    model = problem.model(eps, **(model_overrides or {}))
    op = SemiDiscreteOperator(model, grid, _scheme(scheme, problem), problem.boundary)
    C = problem.cfl_C if cfl_C is None else float(cfl_C)
    Dt = C * grid.dx**2 if Delta_t is None else float(Delta_t)
    dt = eps if delta_t is None else float(delta_t)
    params = ProjectiveParams(eps, dt, Dt, K, C, get_tableau(problem.tableau if tableau is None else tableau))
    f0 = init_kinetic(model, grid, problem.u0, discontinuous=problem.discontinuous)
    T = problem.t_end if t_end is None else float(t_end)
    wanted = sorted(float(t) for t in output_times if 0.0 <= t <= T)
    snaps: dict[float, np.ndarray] = {}
    mass: list[tuple[float, np.ndarray]] = []
    if 0.0 in wanted:
        snaps[0.0] = project(f0)
    if track_mass:
        mass.append((0.0, total_mass(project(f0), grid)))

    def cb(t: float, f: np.ndarray) -> None:
        for w in wanted:
            if abs(t - w) <= 1e-12 * max(1.0, T) and w not in snaps:
                snaps[w] = project(f)
        if track_mass:
            mass.append((t, total_mass(project(f), grid)))

    f = integrate_projective(op, f0, T, params, callback=cb, output_times=[w for w in wanted if 0 < w < T])
    u = project(f)
    if wanted and T in wanted:
        snaps[T] = u
    return RunResult(grid, f, u, params, snaps, mass)


def _parallel_map(fn: Callable[[Any], Any], items: Sequence[Any], workers: int) -> list[Any]:
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ----------------------------------------------------------------------------
# convergence studies


def spatial_convergence(
    problem: Problem | str,
    scheme_order: SchemeSpec | int,
    grid_sizes: Sequence[int],
    *,
    Delta_t: float,
    epsilon: float,
    t_end: float | None = None,
    tableau: str | int = "rk4",
    K: int = 2,
    workers: int = 1,
    model_overrides: dict[str, float] | None = None,
) -> ConvergenceTable:
    """Errors against the exact cell averages at ``t_end`` for a sequence of grids.

    The time step is fixed, so the grid error dominates until the
    inner-integrator contribution (of size ``epsilon``) takes over; rows with
    L1 error below ``10 epsilon`` are flagged as plateau.

    Without ``model_overrides`` the hyperbolic speed listed for this scheme
    order under ``problem.extra["spatial_lambda"]`` is used, if any.  The
    upwind dissipation of the odd-order stencils and the error of the
    centred parabolic stencil have opposite signs; the listed speeds keep
    the two from cancelling on the studied grids.
    """
    if isinstance(problem, str):
        problem = catalog(problem)
    if problem.exact is None:
        raise MissingExactSolution(f"problem {problem.name!r} has no exact solution for a spatial study")
    T = problem.t_end if t_end is None else float(t_end)
    if model_overrides is None:
        by_order = problem.extra.get("spatial_lambda", {})
        key = scheme_order if isinstance(scheme_order, int) else None
        model_overrides = {"lambda": by_order[key]} if key in by_order else {}

    def one(n: int) -> tuple[float, tuple[float, float, float]]:
        res = simulate(problem, n, scheme=scheme_order, epsilon=epsilon, Delta_t=Delta_t, K=K,
                       tableau=tableau, t_end=T, model_overrides=model_overrides)
        exact = _exact_averages(problem, res.grid, T)
        return res.grid.dx, error_norms(res.u - exact, res.grid)

    out = _parallel_map(one, list(grid_sizes), workers)
    label = f"{problem.name} scheme={scheme_order} eps={epsilon:g} Dt={Delta_t:g}"
    return ConvergenceTable.from_errors("space", [o[0] for o in out], [o[1] for o in out], 10.0 * epsilon, label)


def _exact_averages(problem: Problem, grid: Grid, t: float) -> np.ndarray:
    if problem.dim == 1:
        return cell_averages(lambda x: problem.exact(x, t), grid)
    return cell_averages(lambda x, y: problem.exact(x, y, t), grid)


def _check_ladder(ladder: Sequence[float], gap: float) -> list[float]:
    ladder = [float(d) for d in ladder]
    if len(ladder) < 2:
        raise ParameterError("a time-step ladder needs at least two entries")
    for a, b in zip(ladder[:-1], ladder[1:]):
        if not math.isclose(a / b, 2.0, rel_tol=1e-9):
            raise ParameterError(f"time-step ladder must halve successively; {a:g} -> {b:g}")
    if ladder[-1] / 2.0 < gap * (1 - 1e-12):
        raise ParameterError(
            f"smallest step {ladder[-1] / 2:g} is shorter than the damping steps {gap:g} (M < 0)"
        )
    return ladder


def temporal_convergence(
    problem: Problem | str,
    tableau: str | int,
    ladder: Sequence[float],
    *,
    cells: int,
    epsilon: float,
    t_end: float | None = None,
    scheme: SchemeSpec | int | None = None,
    K: int = 2,
    workers: int = 1,
    keep_solutions: dict[float, np.ndarray] | None = None,
) -> ConvergenceTable:
    """Successive-difference errors ``||u_Dt(T) - u_{Dt/2}(T)||`` along a halving ladder.

    Every ladder entry is paired with a run at half its step (the last pair
    adds one extra run), so a ladder of ``n`` steps yields ``n`` errors and
    ``n - 1`` observed orders ``log2(e_Dt / e_{Dt/2})``.
    """
    if isinstance(problem, str):
        problem = catalog(problem)
    steps = _check_ladder(ladder, (K + 1) * epsilon)
    T = problem.t_end if t_end is None else float(t_end)
    runs = steps + [steps[-1] / 2.0]

    def one(Dt: float) -> np.ndarray:
        return simulate(problem, cells, scheme=scheme, epsilon=epsilon, Delta_t=Dt, K=K,
                        tableau=tableau, t_end=T).u

    sols = _parallel_map(one, runs, workers)
    grid = problem.grid(cells)
    if keep_solutions is not None:
        keep_solutions.update({Dt: u for Dt, u in zip(runs, sols)})
    errs = [error_norms(sols[i] - sols[i + 1], grid) for i in range(len(steps))]
    label = f"{problem.name} tableau={get_tableau(tableau).name} eps={epsilon:g} cells={cells}"
    return ConvergenceTable.from_errors("time", steps, errs, 10.0 * epsilon, label)


def richardson_extrapolate(u_coarse: np.ndarray, u_fine: np.ndarray, order: int) -> np.ndarray:
    """Order-``p`` extrapolation ``(u_Dt - 2^p u_{Dt/2}) / (1 - 2^p)``."""
    q = 2.0**order
    return (np.asarray(u_coarse) - q * np.asarray(u_fine)) / (1.0 - q)


# ----------------------------------------------------------------------------
# timing


def median_time(fn: Callable[[], Any], repeats: int = 3, warmup: bool = True) -> float:
    """Median wall-clock time over ``repeats`` calls after one discarded warm-up call."""
    if warmup:
        fn()
    times = []
    for _ in range(max(1, repeats)):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return float(statistics.median(times))


@dataclass
class SpeedupRow:
    epsilon: float
    cpu_direct: float
    cpu_pi: float
    real_factor: float
    theoretical_factor: float
    direct_estimated: bool = False
    Delta_t: float = 0.0
    delta_t: float = 0.0
    K: int = 2

    HEADER = ("epsilon", "Delta_t", "delta_t", "K", "cpu_direct", "cpu_pi", "real_factor",
              "theoretical_factor", "direct_estimated")

    def to_row(self) -> list[Any]:
        return [self.epsilon, self.Delta_t, self.delta_t, self.K, self.cpu_direct, self.cpu_pi,
                self.real_factor, self.theoretical_factor, self.direct_estimated]


def speedup_bench(
    problem: Problem | str = "viscous_lwr",
    eps_list: Sequence[float] = (1e-5, 1e-7),
    *,
    cells: int | None = None,
    cfl_C: float | None = None,
    K: int = 2,
    t_end: float | None = None,
    repeats: int = 3,
    direct_budget: int = 10**8,
    probe_steps: int = 20000,
) -> list[SpeedupRow]:
    """Wall-clock comparison of direct forward Euler (step ``eps``) and PFE.

    Direct runs needing more than ``direct_budget`` steps are timed over
    ``probe_steps`` steps and extrapolated linearly (flagged in the row).
    """
    if isinstance(problem, str):
        problem = catalog(problem)
    T = problem.t_end if t_end is None else float(t_end)
    rows = []
    for eps in eps_list:
        grid = problem.grid(cells)
        model = problem.model(eps)
        op = SemiDiscreteOperator(model, grid, problem.scheme, problem.boundary)
        C = problem.cfl_C if cfl_C is None else float(cfl_C)
        params = ProjectiveParams(eps, eps, C * grid.dx**2, K, C, get_tableau("euler"))
        f0 = init_kinetic(model, grid, problem.u0, discontinuous=problem.discontinuous)
        cpu_pi = median_time(lambda: integrate_projective(op, f0, T, params), repeats)
        n_direct = math.ceil(T / eps - 1e-9)
        estimated = n_direct > direct_budget
        if estimated:
            n_probe = min(probe_steps, n_direct)
            per_step = median_time(lambda: direct_integrate(op, f0, T, eps, force=True, max_steps=n_probe),
                                   repeats) / n_probe
            cpu_direct = per_step * n_direct
        else:
            cpu_direct = median_time(lambda: direct_integrate(op, f0, T, eps, force=True), repeats)
        rows.append(SpeedupRow(eps, cpu_direct, cpu_pi, cpu_direct / cpu_pi, params.theoretical_speedup,
                               estimated, params.Delta_t, params.delta_t, K))
        log.info("speedup eps=%g: direct %.3gs%s, PI %.3gs", eps, cpu_direct, " (est.)" if estimated else "", cpu_pi)
    return rows


@dataclass
class ImexRow:
    epsilon: float
    cpu_pi: float
    cpu_imex: float
    l1_distance: float
    Delta_t: float

    HEADER = ("epsilon", "Delta_t", "cpu_pi", "cpu_imex", "l1_distance")

    def to_row(self) -> list[Any]:
        return [self.epsilon, self.Delta_t, self.cpu_pi, self.cpu_imex, self.l1_distance]


def imex_comparison(
    problem: Problem | str = "viscous_lwr",
    eps_list: Sequence[float] = (1e-5, 1e-7),
    *,
    cells: int | None = None,
    cfl_C: float | None = None,
    Delta_t: float | None = None,
    K: int = 2,
    t_end: float | None = None,
    repeats: int = 3,
    timed: bool = True,
) -> list[ImexRow]:
    """PFE against first-order IMEX (implicit relaxation) with the same outer step."""
    if isinstance(problem, str):
        problem = catalog(problem)
    T = problem.t_end if t_end is None else float(t_end)
    rows = []
    for eps in eps_list:
        grid = problem.grid(cells)
        model = problem.model(eps)
        op = SemiDiscreteOperator(model, grid, problem.scheme, problem.boundary)
        C = problem.cfl_C if cfl_C is None else float(cfl_C)
        Dt = C * grid.dx**2 if Delta_t is None else float(Delta_t)
        params = ProjectiveParams(eps, eps, Dt, K, C, get_tableau("euler"))
        f0 = init_kinetic(model, grid, problem.u0, discontinuous=problem.discontinuous)
        run_pi = lambda: integrate_projective(op, f0, T, params)  # noqa: E731
        run_imex = lambda: integrate_imex1(op, f0, T, Dt)  # noqa: E731
        u_pi, u_imex = project(run_pi()), project(run_imex())
        cpu_pi = median_time(run_pi, repeats) if timed else float("nan")
        cpu_imex = median_time(run_imex, repeats) if timed else float("nan")
        rows.append(ImexRow(eps, cpu_pi, cpu_imex, error_norms(u_pi - u_imex, grid)[0], Dt))
    return rows


# ----------------------------------------------------------------------------
# snapshots


def snapshot_run(
    problem: Problem | str,
    out_dir: str | Path | None = None,
    *,
    output_times: Sequence[float] | None = None,
    **run_options: Any,
) -> RunResult:
    """Run a problem and dump the macroscopic field at each requested time as CSV.

    Always records the final time and the mass history.  Files are named
    ``<problem>_t<time>.csv``; a ``manifest.json`` records the setup.
    """
    if isinstance(problem, str):
        problem = catalog(problem)
    T = float(run_options.get("t_end") or problem.t_end)
    times = sorted(set(list(output_times if output_times is not None else problem.output_times) + [T]))
    res = simulate(problem, output_times=times, track_mass=True, **run_options)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        files = []
        for t, u in sorted(res.snapshots.items()):
            files.append(write_macro_csv(out / f"{problem.name}_t{t:.6g}.csv", res.grid, u).name)
        mass_rows = [[t, *m] for t, m in res.mass]
        write_csv(out / f"{problem.name}_mass.csv", ["t", *[f"mass_u{k + 1}" for k in range(problem.K)]],
                  mass_rows)
        manifest = {
            "problem": problem.describe(),
            "cells": list(res.grid.cells),
            "epsilon": res.params.epsilon,
            "delta_t": res.params.delta_t,
            "Delta_t": res.params.Delta_t,
            "K": res.params.K,
            "tableau": res.params.tableau.name,
            "files": files,
        }
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str))
    return res

