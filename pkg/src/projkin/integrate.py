"""Projective time integrators and baseline stiff integrators.

The inner integrator is forward Euler with a small step ``delta_t`` (of the
order of the relaxation time).  A projective step takes ``K + 1`` inner steps
to damp the fast modes and then extrapolates the last slope over the
remaining part of the outer step ``Delta_t``.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field, replace

import numpy as np

from .core import Grid
from .model import ParameterError, maxwellian, project
from .transport import SemiDiscreteOperator

__all__ = [
    "ButcherTableau",
    "TableauError",
    "IntegrationError",
    "ProjectiveParams",
    "TABLEAUX",
    "get_tableau",
    "inner_euler",
    "pfe_step",
    "prk_step",
    "projective_step",
    "select_parameters",
    "integrate_projective",
    "direct_integrate",
    "imex1_step",
    "integrate_imex1",
    "StepResult",
]

log = logging.getLogger(__name__)

Rhs = Callable[[np.ndarray], np.ndarray]

MAX_DIRECT_STEPS = 10**9


class TableauError(ParameterError):
    """Butcher tableau unusable for projective Runge--Kutta."""


class IntegrationError(RuntimeError):
    """Non-finite values appeared during time stepping."""

    def __init__(self, message: str, step: int | None = None, time: float | None = None) -> None:
        super().__init__(message)
        self.step = step
        self.time = time


@dataclass(frozen=True)
class ButcherTableau:
    """Explicit Runge--Kutta tableau; ``a`` is strictly lower triangular ``S x S``."""

    name: str
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self) -> None:
        a = np.atleast_2d(np.asarray(self.a, dtype=float))
        b = np.asarray(self.b, dtype=float).ravel()
        c = np.asarray(self.c, dtype=float).ravel()
        S = b.size
        if a.shape != (S, S) or c.size != S:
            raise TableauError(f"inconsistent tableau shapes a={a.shape}, b={b.size}, c={c.size}")
        if np.any(np.triu(a) != 0.0):
            raise TableauError("only explicit tableaux (strictly lower triangular a) are supported")
        if not math.isclose(b.sum(), 1.0, abs_tol=1e-12):
            raise TableauError(f"weights must sum to one, got {b.sum()}")
        if not np.allclose(a.sum(axis=1), c, atol=1e-12):
            raise TableauError("row sums of a must equal the nodes c")
        if np.any(c[1:] == 0.0):
            raise TableauError("stages beyond the first need c_s > 0 (the stage seed divides by c_s)")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @property
    def stages(self) -> int:
        return self.b.size

    def is_convex(self, tol: float = 1e-14) -> bool:
        """``0 <= b, c <= 1`` and ``0 <= a_sl <= c_s``: the sufficient stability condition."""
        a, b, c = self.a, self.b, self.c
        ok = np.all(b >= -tol) and np.all(b <= 1 + tol) and np.all(c >= -tol) and np.all(c <= 1 + tol)
        ok = ok and np.all(a >= -tol) and np.all(a <= c[:, None] + tol)
        return bool(ok)

    @classmethod
    def from_rows(cls, name: str, rows: list[list[float]], b: list[float], c: list[float]) -> "ButcherTableau":
        S = len(b)
        a = np.zeros((S, S))
        for s, row in enumerate(rows, start=1):
            a[s, : len(row)] = row
        return cls(name, a, np.asarray(b, dtype=float), np.asarray(c, dtype=float))


TABLEAUX: dict[str, ButcherTableau] = {
    "euler": ButcherTableau.from_rows("euler", [], [1.0], [0.0]),
    "rk2": ButcherTableau.from_rows("rk2", [[1.0]], [0.5, 0.5], [0.0, 1.0]),
    "rk3_ssp": ButcherTableau.from_rows(
        "rk3_ssp", [[1.0], [0.25, 0.25]], [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0], [0.0, 1.0, 0.5]
    ),
    "rk4": ButcherTableau.from_rows(
        "rk4",
        [[0.5], [0.0, 0.5], [0.0, 0.0, 1.0]],
        [1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
        [0.0, 0.5, 0.5, 1.0],
    ),
}

_ORDER_TABLEAU = {1: "euler", 2: "rk2", 3: "rk3_ssp", 4: "rk4"}


def get_tableau(key: str | int | ButcherTableau) -> ButcherTableau:
    """Look up a tableau by name (``euler``, ``rk2``, ``rk3_ssp``, ``rk4``) or order."""
    if isinstance(key, ButcherTableau):
        return key
    if isinstance(key, (int, np.integer)) or (isinstance(key, str) and key.isdigit()):
        order = int(key)
        if order not in _ORDER_TABLEAU:
            raise TableauError(f"no tableau of order {order}")
        return TABLEAUX[_ORDER_TABLEAU[order]]
    name = str(key).lower().replace("-", "_")
    aliases = {"pfe": "euler", "heun": "rk2", "ssp3": "rk3_ssp", "rk3": "rk3_ssp", "classical": "rk4"}
    name = aliases.get(name, name)
    if name not in TABLEAUX:
        raise TableauError(f"unknown tableau {key!r}")
    return TABLEAUX[name]


@dataclass(frozen=True)
class ProjectiveParams:
    """Inner step ``delta_t``, outer step ``Delta_t``, ``K`` damping steps and a tableau."""

    epsilon: float
    delta_t: float
    Delta_t: float
    K: int = 2
    cfl_C: float | None = None
    tableau: ButcherTableau = field(default_factory=lambda: TABLEAUX["euler"])

    def __post_init__(self) -> None:
        if not self.delta_t > 0.0:
            raise ParameterError(f"inner step must be positive, got {self.delta_t}")
        if int(self.K) != self.K or self.K < 0:
            raise ParameterError(f"K must be a nonnegative integer, got {self.K}")
        object.__setattr__(self, "K", int(self.K))
        object.__setattr__(self, "tableau", get_tableau(self.tableau))
        if self.M < -1e-9:
            raise ParameterError(
                f"Delta_t = {self.Delta_t:g} < (K+1) delta_t = {(self.K + 1) * self.delta_t:g}: "
                "negative extrapolation length"
            )

    @property
    def M(self) -> float:
        """Relative extrapolation length ``Delta_t / delta_t - (K + 1)``."""
        return self.Delta_t / self.delta_t - (self.K + 1)

    @property
    def theoretical_speedup(self) -> float:
        """Ratio of inner steps saved per outer step: ``Delta_t / ((K + 1) delta_t)``."""
        return self.Delta_t / ((self.K + 1) * self.delta_t)

    def with_Delta_t(self, Delta_t: float) -> "ProjectiveParams":
        return replace(self, Delta_t=float(Delta_t))


def _guard(f: np.ndarray, where: str, step: int | None = None, time: float | None = None) -> None:
    if not np.all(np.isfinite(f)):
        raise IntegrationError(f"non-finite values after {where}", step, time)


def inner_euler(rhs: Rhs, f: np.ndarray, delta_t: float) -> np.ndarray:
    """One forward Euler step ``f + delta_t * rhs(f)``."""
    if not delta_t > 0.0:
        raise ParameterError("inner step must be positive")
    return f + delta_t * rhs(f)


@dataclass
class StepResult:
    state: np.ndarray
    inner: list[np.ndarray] | None = None


def _inner_run(rhs: Rhs, f: np.ndarray, delta_t: float, K: int, keep: list | None) -> tuple[np.ndarray, np.ndarray]:
    """``K + 1`` inner steps; returns ``(f^{K+1}, slope)`` with ``slope = rhs(f^K)``.

    The slope equals ``(f^{K+1} - f^K)/delta_t`` but is taken from the
    right-hand side directly: differencing two O(1) iterates and scaling by
    ``Delta_t`` would amplify their rounding by ``Delta_t/delta_t``.
    """
    cur = f
    slope = None
    for _ in range(K + 1):
        slope = rhs(cur)
        cur = cur + delta_t * slope
        if keep is not None:
            keep.append(cur)
    assert slope is not None
    return cur, slope


def pfe_step(rhs: Rhs, f: np.ndarray, params: ProjectiveParams, *, Delta_t: float | None = None,
             keep_inner: bool = False) -> np.ndarray | StepResult:
    """Projective forward Euler: ``f^{K+1} + M (f^{K+1} - f^K)``, ``M = Delta_t/delta_t - (K+1)``."""
    dt = params.delta_t
    Dt = params.Delta_t if Delta_t is None else float(Delta_t)
    M = Dt / dt - (params.K + 1)
    if M < -1e-9:
        raise ParameterError("outer step shorter than the damping steps")
    keep: list | None = [] if keep_inner else None
    fk1, slope = _inner_run(rhs, f, dt, params.K, keep)
    # written as base + (M delta_t) * slope so that it matches the one-stage PRK bitwise
    out = fk1 + (Dt - (params.K + 1) * dt) * slope
    return StepResult(out, keep) if keep_inner else out


def prk_step(rhs: Rhs, f: np.ndarray, params: ProjectiveParams, *, Delta_t: float | None = None,
             keep_inner: bool = False) -> np.ndarray | StepResult:
    """Projective Runge--Kutta step with the tableau of ``params``.

    Stage ``s`` starts from ``f^{K+1} + (c_s Delta_t - (K+1) delta_t) sum_l (a_sl / c_s) k_l``,
    takes ``K + 1`` inner steps and records the slope ``k_s`` of the last one.
    The result is ``f^{K+1} + (Delta_t - (K+1) delta_t) sum_s b_s k_s``.
    """
    tab = params.tableau
    dt = params.delta_t
    K = params.K
    Dt = params.Delta_t if Delta_t is None else float(Delta_t)
    if Dt - (K + 1) * dt < -1e-9 * dt:
        raise ParameterError("outer step shorter than the damping steps")
    keep: list | None = [] if keep_inner else None
    base, first = _inner_run(rhs, f, dt, K, keep)
    slopes = [first]
    for s in range(1, tab.stages):
        cs = tab.c[s]
        combo = None
        for l in range(s):
            w = tab.a[s, l] / cs
            if w != 0.0:
                combo = w * slopes[l] if combo is None else combo + w * slopes[l]
        seed = base if combo is None else base + (cs * Dt - (K + 1) * dt) * combo
        slopes.append(_inner_run(rhs, seed, dt, K, keep)[1])
    total = None
    for s in range(tab.stages):
        if tab.b[s] != 0.0:
            total = tab.b[s] * slopes[s] if total is None else total + tab.b[s] * slopes[s]
    out = base + (Dt - (K + 1) * dt) * total
    return StepResult(out, keep) if keep_inner else out


def projective_step(rhs: Rhs, f: np.ndarray, params: ProjectiveParams, *, Delta_t: float | None = None) -> np.ndarray:
    """Dispatch to :func:`pfe_step` for the one-stage tableau, otherwise :func:`prk_step`."""
    if params.tableau.stages == 1:
        return pfe_step(rhs, f, params, Delta_t=Delta_t)
    return prk_step(rhs, f, params, Delta_t=Delta_t)


def select_parameters(
    epsilon: float,
    grid: Grid | float,
    cfl_C: float,
    K: int = 2,
    order: int | str = 1,
) -> ProjectiveParams:
    """``delta_t = eps``, ``K >= 2`` and the parabolic CFL ``Delta_t = C dx^2``."""
    if not epsilon > 0.0:
        raise ParameterError("epsilon must be positive")
    dx = grid.dx if isinstance(grid, Grid) else float(grid)
    K = max(int(K), 2)
    Delta_t = float(cfl_C) * dx * dx
    delta_t = float(epsilon)
    if Delta_t < (K + 1) * delta_t:
        raise ParameterError(
            f"Delta_t = C dx^2 = {Delta_t:g} is shorter than (K+1) delta_t = {(K + 1) * delta_t:g}; "
            "the projective gap is closed, reduce Delta_t to direct integration (use direct_integrate)"
        )
    return ProjectiveParams(epsilon, delta_t, Delta_t, K, float(cfl_C), get_tableau(order))


def integrate_projective(
    rhs: Rhs,
    f0: np.ndarray,
    t_end: float,
    params: ProjectiveParams,
    *,
    callback: Callable[[float, np.ndarray], None] | None = None,
    output_times: list[float] | None = None,
) -> np.ndarray:
    """Advance ``f0`` to ``t_end`` with projective steps.

    The last outer step is shortened to land on ``t_end``.  If the remainder
    is shorter than the ``K + 1`` damping steps, plain inner Euler steps are
    used instead, the final one shortened as needed.  ``output_times``
    shortens steps so that each requested time is hit exactly; the
    ``callback`` receives ``(t, f)`` after each outer step.
    """
    if t_end < 0:
        raise ParameterError("t_end must be nonnegative")
    stops = sorted(set(float(t) for t in (output_times or []) if 0 < t < t_end)) + [float(t_end)]
    f = np.array(f0, dtype=float, copy=True)
    t = 0.0
    step = 0
    gap = (params.K + 1) * params.delta_t
    tol = 1e-12 * max(1.0, t_end)
    for stop in stops:
        while stop - t > tol:
            remaining = stop - t
            n_left = math.ceil(remaining / params.Delta_t - 1e-9)
            if n_left <= 1:
                h = remaining
            else:
                h = params.Delta_t
            if h >= gap:
                f = projective_step(rhs, f, params, Delta_t=h)
                t = stop if h == remaining else t + h
            else:
                # closing remainder: inner Euler steps, last one partial
                while stop - t > tol:
                    d = min(params.delta_t, stop - t)
                    f = f + d * rhs(f)
                    t = stop if d == stop - t else t + d
            step += 1
            _guard(f, "outer step", step, t)
            if callback is not None:
                callback(t, f)
    return f


def direct_integrate(
    rhs: Rhs,
    f0: np.ndarray,
    t_end: float,
    delta_t: float,
    *,
    force: bool = False,
    max_steps: int | None = None,
) -> np.ndarray:
    """Forward Euler with step ``delta_t`` all the way to ``t_end`` (last step shortened).

    Refuses more than 10^9 steps unless ``force`` is set.  ``max_steps``
    stops early after that many steps (used for timing extrapolation).
    """
    if not delta_t > 0.0:
        raise ParameterError("delta_t must be positive")
    n_full = int(math.floor(t_end / delta_t + 1e-9))
    rest = t_end - n_full * delta_t
    total = n_full + (1 if rest > 1e-12 * delta_t else 0)
    if total > MAX_DIRECT_STEPS and not force:
        raise ParameterError(f"direct integration needs {total} steps (> 1e9); pass force=True to proceed")
    f = np.array(f0, dtype=float, copy=True)
    limit = n_full if max_steps is None else min(n_full, int(max_steps))
    check_every = max(1, min(limit, 1000))
    for n in range(limit):
        f = f + delta_t * rhs(f)
        if (n + 1) % check_every == 0:
            _guard(f, "direct step", n + 1)
    if max_steps is None and total > n_full:
        f = f + rest * rhs(f)
    _guard(f, "direct integration")
    return f


def imex1_step(op: SemiDiscreteOperator, f: np.ndarray, Delta_t: float) -> np.ndarray:
    """First-order IMEX step: explicit transport, implicit relaxation.

    The transported moments ``u' = P (f - Delta_t Phi(f))`` are unchanged by
    the relaxation, so the implicit update is pointwise:
    ``f' = (f - Delta_t Phi(f) + (Delta_t/eps) M(u')) / (1 + Delta_t/eps)``.
    """
    star = f - Delta_t * op.transport_term(f)
    u = project(star)
    r = Delta_t / op.epsilon
    out = (star + r * maxwellian(op.model, u)) / (1.0 + r)
    return out


def integrate_imex1(op: SemiDiscreteOperator, f0: np.ndarray, t_end: float, Delta_t: float) -> np.ndarray:
    """Repeated :func:`imex1_step` with the last step shortened to land on ``t_end``."""
    f = np.array(f0, dtype=float, copy=True)
    t = 0.0
    n = 0
    while t_end - t > 1e-12 * max(1.0, t_end):
        h = min(Delta_t, t_end - t)
        f = imex1_step(op, f, h)
        t = t_end if h == t_end - t else t + h
        n += 1
        _guard(f, "IMEX step", n, t)
    return f
