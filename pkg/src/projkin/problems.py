"""Catalog of benchmark advection--diffusion problems.

Each :class:`Problem` bundles the macroscopic fluxes, the (raw) diffusion
``B`` and its scaling ``xi`` (the equation reads
``u_t + sum_d d_d A_d(u) = xi sum_d d_dd B(u)``), initial data, domain,
boundary rule, final time, an exact solution when one exists, and the
kinetic constants recommended for it.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .core import BoundaryRule, Grid
from .model import (
    KineticModel,
    ModelKind,
    ParameterError,
    build_drm1_1d,
    build_drm1_2d,
    build_drm2_1d,
    build_ovm_1d,
    check_mmf,
)
from .transport import SchemeSpec

__all__ = ["Problem", "catalog", "evaluate_exact", "CATALOG_NAMES", "MissingExactSolution", "build_model"]

Fn = Callable[[np.ndarray], np.ndarray]


class MissingExactSolution(LookupError):
    """The problem has no closed-form solution."""


@dataclass(frozen=True, eq=False)
class Problem:
    """A benchmark problem and the settings recommended for solving it.

    ``flux``/``flux_prime`` hold one entry per direction; ``B``/``B_prime``
    are the raw diffusion and its derivative, scaled by ``xi``.  ``u0`` maps
    cell coordinates to a state of shape ``(K, ...)`` (or ``(...)`` when
    ``K == 1``); ``exact(x, t)`` (1D) or ``exact(x, y, t)`` (2D) likewise.
    ``model_kind``/``model_params`` give admissible kinetic constants.
    """

    name: str
    dim: int
    K: int
    flux: tuple[Fn, ...]
    flux_prime: tuple[Fn, ...]
    B: Fn
    B_prime: Fn
    xi: float
    u0: Callable[..., np.ndarray]
    domain: tuple[tuple[float, float], ...]
    boundary: BoundaryRule
    t_end: float
    cells: tuple[int, ...]
    state_box: tuple[tuple[float, float], ...]
    model_kind: ModelKind
    model_params: dict[str, float]
    discontinuous: bool = False
    exact: Callable[..., np.ndarray] | None = None
    scheme: SchemeSpec = field(default_factory=SchemeSpec)
    tableau: str = "euler"
    cfl_C: float = 0.4
    epsilon: float = 1e-7
    output_times: tuple[float, ...] = ()
    description: str = ""
    notes: tuple[str, ...] = ()
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def has_exact(self) -> bool:
        return self.exact is not None

    def diffusion(self, u: np.ndarray) -> np.ndarray:
        """Scaled diffusion ``xi B(u)`` as seen by the kinetic model."""
        return self.xi * self.B(u)

    def diffusion_prime(self, u: np.ndarray) -> np.ndarray:
        return self.xi * self.B_prime(u)

    def grid(self, cells: int | tuple[int, ...] | None = None) -> Grid:
        if cells is None:
            cells = self.cells
        if isinstance(cells, (int, np.integer)):
            cells = (int(cells),) * self.dim
        if self.dim == 1:
            return Grid.uniform_1d(self.domain[0][0], self.domain[0][1], int(cells[0]))
        return Grid.uniform_2d(self.domain[0], self.domain[1], int(cells[0]), int(cells[1]))

    def model(self, epsilon: float | None = None, **overrides: float) -> KineticModel:
        """Kinetic model with the recommended (or overridden) constants."""
        return build_model(self, epsilon if epsilon is not None else self.epsilon, **overrides)

    def describe(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "dim": self.dim,
            "K": self.K,
            "xi": self.xi,
            "domain": [list(d) for d in self.domain],
            "cells": list(self.cells),
            "boundary": self.boundary.value,
            "t_end": self.t_end,
            "discontinuous": self.discontinuous,
            "has_exact": self.has_exact,
            "model": self.model_kind.value,
            **{f"model.{k}": v for k, v in self.model_params.items()},
            "scheme.hyperbolic_order": self.scheme.hyperbolic_order,
            "scheme.parabolic_order": self.scheme.parabolic_order,
            "tableau": self.tableau,
            "cfl_C": self.cfl_C,
            "epsilon": self.epsilon,
            "output_times": list(self.output_times),
            "description": self.description,
            "notes": list(self.notes),
        }


def build_model(problem: Problem, epsilon: float, kind: ModelKind | str | None = None,
                **overrides: float) -> KineticModel:
    kind = problem.model_kind if kind is None else ModelKind(kind)
    p = {**problem.model_params, **overrides}
    K = problem.K
    if kind is ModelKind.DRM1_1D:
        return build_drm1_1d(p["lambda"], p["theta"], p.get("mu", 0.0), epsilon, problem.flux[0],
                             problem.diffusion, n_components=K, A_prime=problem.flux_prime[0],
                             B_prime=problem.diffusion_prime)
    if kind is ModelKind.DRM2_1D:
        return build_drm2_1d(p["lambda_m"], p["lambda_p"], p["theta"], p.get("mu", 0.0), epsilon,
                             problem.flux[0], problem.diffusion, n_components=K,
                             A_prime=problem.flux_prime[0], B_prime=problem.diffusion_prime)
    if kind is ModelKind.OVM_1D:
        return build_ovm_1d(p["lambda"], p["theta"], epsilon, problem.flux[0], problem.diffusion,
                            n_components=K, A_prime=problem.flux_prime[0], B_prime=problem.diffusion_prime)
    if kind is ModelKind.DRM1_2D:
        return build_drm1_2d(p["lambda1"], p["lambda2"], p["theta"], p.get("mu", 0.0), epsilon,
                             problem.flux[0], problem.flux[1], problem.diffusion, n_components=K,
                             A1_prime=problem.flux_prime[0], A2_prime=problem.flux_prime[1],
                             B_prime=problem.diffusion_prime)
    raise ParameterError(f"unsupported model kind {kind}")  # pragma: no cover


# ----------------------------------------------------------------------------
# elementary functions


def _zero(u: np.ndarray) -> np.ndarray:
    return np.zeros_like(np.asarray(u, dtype=float))


def _one(u: np.ndarray) -> np.ndarray:
    return np.ones_like(np.asarray(u, dtype=float))


def _identity(u: np.ndarray) -> np.ndarray:
    return np.array(u, dtype=float, copy=True)


def _gaussian_periodic(x: np.ndarray, t: float, xi: float, delta: float, centre: float = 0.5,
                       period: float = 1.0, n_images: int = 6) -> np.ndarray:
    """Heat kernel solution of a Gaussian bump on a periodic interval (sum over images)."""
    x = np.asarray(x, dtype=float)
    w = delta * delta + 4.0 * xi * t
    amp = 0.01 * math.sqrt(delta * delta / w)
    out = np.zeros_like(x)
    for k in range(-n_images, n_images + 1):
        out = out + np.exp(-((x - centre + k * period) ** 2) / w)
    return 1.0 + amp * out


def _bump(x: np.ndarray, delta: float = 0.1) -> np.ndarray:
    return _gaussian_periodic(x, 0.0, 0.0, delta)


# -- linear problems

def _linear_diffusion() -> Problem:
    xi = 1e-2
    delta = 0.1
    return Problem(
        name="linear_diffusion",
        dim=1,
        K=1,
        flux=(_zero,),
        flux_prime=(_zero,),
        B=_identity,
        B_prime=_one,
        xi=xi,
        u0=lambda x: _gaussian_periodic(x, 0.0, xi, delta),
        domain=((0.0, 1.0),),
        boundary=BoundaryRule.PERIODIC,
        t_end=1e-3,
        cells=(64,),
        state_box=((0.99, 1.02),),
        model_kind=ModelKind.DRM1_1D,
        model_params={"lambda": 1.0, "theta": 0.2, "mu": 0.0},
        exact=lambda x, t: _gaussian_periodic(x, t, xi, delta),
        scheme=SchemeSpec(3, 4),
        tableau="rk4",
        cfl_C=0.2,
        epsilon=1e-10,
        description="u_t = xi u_xx with a Gaussian bump on a periodic unit interval",
        notes=(
            "exact solution summed over periodic images",
            "spatial_lambda: hyperbolic speed used per scheme order in spatial studies",
        ),
        extra={"spatial_lambda": {3: 4.0, 4: 0.05}},
    )


def _advection_diffusion() -> Problem:
    c = 10.0
    delta = 0.1

    def exact(x, t):
        return _gaussian_periodic(np.asarray(x, dtype=float) - c * t, t, 1.0, delta)

    return Problem(
        name="advection_diffusion",
        dim=1,
        K=1,
        flux=(lambda u: c * np.asarray(u, dtype=float),),
        flux_prime=(lambda u: np.full_like(np.asarray(u, dtype=float), c),),
        B=_identity,
        B_prime=_one,
        xi=1.0,
        u0=lambda x: _gaussian_periodic(x, 0.0, 1.0, delta),
        domain=((0.0, 1.0),),
        boundary=BoundaryRule.PERIODIC,
        t_end=2e-3,
        cells=(64,),
        state_box=((0.99, 1.02),),
        model_kind=ModelKind.DRM1_1D,
        model_params={"lambda": 25.0, "theta": math.sqrt(2.5), "mu": 0.0},
        exact=exact,
        scheme=SchemeSpec(3, 4),
        tableau="rk4",
        cfl_C=0.15,
        epsilon=1e-10,
        description="u_t + c u_x = u_xx, c = 10, Gaussian bump, periodic",
        notes=("exact solution: translated periodic heat kernel",),
    )


# -- scalar nonlinear problems

def _lwr(xi: float = 1e-2) -> Problem:
    return Problem(
        name="viscous_lwr",
        dim=1,
        K=1,
        flux=(lambda u: 0.5 * (u - u * u),),
        flux_prime=(lambda u: 0.5 - np.asarray(u, dtype=float),),
        B=_identity,
        B_prime=_one,
        xi=xi,
        u0=lambda x: 0.6 + 0.25 * np.sin(2.0 * np.pi * x),
        domain=((0.0, 1.0),),
        boundary=BoundaryRule.PERIODIC,
        t_end=0.1,
        cells=(200,),
        state_box=((0.35, 0.85),),
        model_kind=ModelKind.DRM1_1D,
        model_params={"lambda": 0.5, "theta": math.sqrt(0.1), "mu": 0.0},
        scheme=SchemeSpec(3, 4),
        tableau="euler",
        cfl_C=2.05,
        epsilon=1e-7,
        description="viscous LWR traffic model u_t + ((u - u^2)/2)_x = xi u_xx",
        notes=("xi in {1e-2, 1e-3}; select with catalog('viscous_lwr', xi=...)",),
        extra={"xi_values": (1e-2, 1e-3)},
    )


def _steady_shock() -> Problem:
    xi = 1e-3
    delta = 0.01

    def profile(x, t=0.0):
        return -(2.0 * xi / delta) * np.tanh((np.asarray(x, dtype=float) - 0.5) / delta)

    return Problem(
        name="burgers_steady_shock",
        dim=1,
        K=1,
        flux=(lambda u: 0.5 * u * u,),
        flux_prime=(_identity,),
        B=_identity,
        B_prime=_one,
        xi=xi,
        u0=lambda x: profile(x),
        domain=((0.0, 1.0),),
        boundary=BoundaryRule.ZERO_GRADIENT,
        t_end=0.05,
        cells=(333,),
        state_box=((-0.2, 0.2),),
        model_kind=ModelKind.DRM1_1D,
        model_params={"lambda": 0.25, "theta": 1.0, "mu": 0.0},
        exact=profile,
        scheme=SchemeSpec(4, 4),
        tableau="rk4",
        cfl_C=0.4,
        epsilon=1e-7,
        description="viscous Burgers steady shock u = -(2 xi/delta) tanh((x - 0.5)/delta)",
        notes=("zero-gradient boundaries keep the far-field states of the shock",),
    )


def _degenerate_B(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    return np.where(u > 0.25, u - 0.25, np.where(u < -0.25, u + 0.25, 0.0))


def _degenerate_B_prime(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    return np.where(np.abs(u) > 0.25, 1.0, 0.0)


def _strongly_degenerate(xi: float = 0.1) -> Problem:
    s = 1.0 / math.sqrt(2.0)

    def u0(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        out = np.where((x >= -s - 0.4) & (x <= -s + 0.4), 1.0, out)
        out = np.where((x >= s - 0.4) & (x <= s + 0.4), -1.0, out)
        return out

    return Problem(
        name="burgers_strongly_degenerate",
        dim=1,
        K=1,
        flux=(lambda u: u * u,),
        flux_prime=(lambda u: 2.0 * np.asarray(u, dtype=float),),
        B=_degenerate_B,
        B_prime=_degenerate_B_prime,
        xi=xi,
        u0=u0,
        domain=((-2.0, 2.0),),
        boundary=BoundaryRule.PERIODIC,
        t_end=0.7,
        cells=(267,),
        state_box=((-1.0, 1.0),),
        model_kind=ModelKind.DRM1_1D,
        model_params={"lambda": 3.0, "theta": math.sqrt(0.4), "mu": 0.0},
        discontinuous=True,
        scheme=SchemeSpec(1, 2),
        tableau="euler",
        cfl_C=0.4,
        epsilon=1e-7,
        description="u_t + (u^2)_x = xi (nu(u) u_x)_x with nu = 1{|u| > 0.25}",
        notes=(
            "second plateau read as [1/sqrt2 - 0.4, 1/sqrt2 + 0.4] by symmetry",
            "domain [-2, 2] with periodic boundaries (not stated in the source)",
            "xi = 0 gives the inviscid comparison run",
        ),
    )


def _burgers_2d(xi: float = 0.1) -> Problem:
    def u0(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.zeros(np.broadcast(x, y).shape)
        out = np.where((x - 0.5) ** 2 + (y - 0.5) ** 2 <= 0.16, -1.0, out)
        out = np.where((x + 0.5) ** 2 + (y + 0.5) ** 2 <= 0.16, 1.0, out)
        return out

    sq = lambda u: u * u  # noqa: E731
    dsq = lambda u: 2.0 * np.asarray(u, dtype=float)  # noqa: E731
    return Problem(
        name="burgers_2d_degenerate",
        dim=2,
        K=1,
        flux=(sq, sq),
        flux_prime=(dsq, dsq),
        B=_degenerate_B,
        B_prime=_degenerate_B_prime,
        xi=xi,
        u0=u0,
        domain=((-1.5, 1.5), (-1.5, 1.5)),
        boundary=BoundaryRule.PERIODIC,
        t_end=0.5,
        cells=(100, 100),
        state_box=((-1.0, 1.0),),
        model_kind=ModelKind.DRM1_2D,
        model_params={"lambda1": 5.25, "lambda2": 5.25, "theta": math.sqrt(0.5), "mu": 0.0},
        discontinuous=True,
        scheme=SchemeSpec(1, 2),
        tableau="rk4",
        cfl_C=0.4,
        epsilon=1e-7,
        description="2D Burgers with strongly degenerate diffusion, two circular plateaus",
        notes=("outer step unspecified in the source; parabolic CFL with C = 0.4",),
    )


# -- Buckley-Leverett type problems

def _bl_poly_B(u: np.ndarray) -> np.ndarray:
    """``2u^2 - 4u^3/3`` clamped to its values at 0 and 1 outside ``[0, 1]``."""
    u = np.asarray(u, dtype=float)
    w = np.clip(u, 0.0, 1.0)
    return 2.0 * w * w - (4.0 / 3.0) * w**3


def _bl_poly_B_prime(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    return np.where((u >= 0.0) & (u <= 1.0), 4.0 * u * (1.0 - u), 0.0)


def _three_phase() -> Problem:
    def f(u):
        return u * u / (u * u + (1.0 - u) ** 2 / 10.0)

    def fp(u):
        d = u * u + (1.0 - u) ** 2 / 10.0
        dd = 2.0 * u - (1.0 - u) / 5.0
        return (2.0 * u * d - u * u * dd) / (d * d)

    def mob(u):
        return ((1.0 - u) ** 2 + u * u / 10.0) / (10.0 * u * u + (1.0 - u) ** 2)

    def A(w):
        w = np.asarray(w, dtype=float)
        u, v = w[0], w[1]
        return np.stack([f(u), mob(u) * f(v)])

    def A_prime(w):
        # real spectrum of the (lower-triangular) Jacobian: f'(u) and mob(u) f'(v)
        w = np.asarray(w, dtype=float)
        u, v = w[0], w[1]
        return np.stack([fp(u), mob(u) * fp(v)])

    def u0(x):
        x = np.asarray(x, dtype=float)
        left = x < 1.0
        return np.stack([np.where(left, 0.4, 0.0), np.where(left, 0.6, 0.0)])

    return Problem(
        name="three_phase",
        dim=1,
        K=2,
        flux=(A,),
        flux_prime=(A_prime,),
        B=_bl_poly_B,
        B_prime=_bl_poly_B_prime,
        xi=0.1,
        u0=u0,
        domain=((0.0, 2.5),),
        boundary=BoundaryRule.ZERO_GRADIENT,
        t_end=0.2,
        cells=(500,),
        state_box=((0.0, 1.0), (0.0, 1.0)),
        model_kind=ModelKind.DRM1_1D,
        model_params={"lambda": 5.0, "theta": 1.0, "mu": 0.0},
        discontinuous=True,
        scheme=SchemeSpec(3, 4),
        tableau="euler",
        cfl_C=0.4,
        epsilon=1e-7,
        description="two-saturation porous-media system with B'(w) = 4 w (1 - w)",
        notes=(
            "final time not stated in the source; 0.2 used",
            "flux_prime returns the (real) Jacobian eigenvalues f'(u), mob(u) f'(v)",
            "B(w) = 2w^2 - 4w^3/3 on [0,1], constant outside",
        ),
        extra={"drm2": True},
    )


def _bl_gravity(g: float = 0.0, a: float = 1.0) -> Problem:
    def f(u):
        u = np.asarray(u, dtype=float)
        return u * u / (u * u + a * (1.0 - u) ** 2) * (1.0 - g * (1.0 - u) ** 2)

    def fp(u):
        u = np.asarray(u, dtype=float)
        d = u * u + a * (1.0 - u) ** 2
        dd = 2.0 * u - 2.0 * a * (1.0 - u)
        h = u * u / d
        hp = (2.0 * u * d - u * u * dd) / (d * d)
        grav = 1.0 - g * (1.0 - u) ** 2
        return hp * grav + h * 2.0 * g * (1.0 - u)

    lim = 1.0 - 1.0 / math.sqrt(2.0)

    def u0(x):
        x = np.asarray(x, dtype=float)
        return np.where(x > lim, 1.0, 0.0)

    # subcharacteristic speed from the sampled flux derivative
    us = np.linspace(0.0, 1.0, 2001)
    amax = float(np.max(np.abs(fp(us))))
    theta = math.sqrt(0.1)
    bmax = 0.01 * 1.0
    lam = 1.05 * amax / (1.0 - bmax / theta**2)
    return Problem(
        name="bl_gravity",
        dim=1,
        K=1,
        flux=(f,),
        flux_prime=(fp,),
        B=_bl_poly_B,
        B_prime=_bl_poly_B_prime,
        xi=0.01,
        u0=u0,
        domain=((0.0, 1.0),),
        boundary=BoundaryRule.ZERO_GRADIENT,
        t_end=0.1,
        cells=(100,),
        state_box=((0.0, 1.0),),
        model_kind=ModelKind.DRM1_1D,
        model_params={"lambda": lam, "theta": theta, "mu": 0.0},
        discontinuous=True,
        scheme=SchemeSpec(3, 4),
        tableau="euler",
        cfl_C=0.4,
        epsilon=1e-7,
        output_times=(0.05, 0.1),
        description="Buckley-Leverett flux with gravity f = u^2/(u^2 + a(1-u)^2) (1 - g(1-u)^2)",
        notes=(
            f"viscosity ratio a = {a:g} (not given in the source)",
            "initial step placed at x = 1 - 1/sqrt2 (the source leaves (1-1/sqrt2, 1/sqrt2] open)",
            "g in {0, 5}; select with catalog('bl_gravity', g=...)",
        ),
        extra={"g": g, "a": a},
    )


def _bl_2d() -> Problem:
    def f1(u):
        u = np.asarray(u, dtype=float)
        return u * u / (u * u + (1.0 - u) ** 2)

    def f1p(u):
        u = np.asarray(u, dtype=float)
        d = u * u + (1.0 - u) ** 2
        return 2.0 * u * (1.0 - u) / (d * d)

    def f2(u):
        u = np.asarray(u, dtype=float)
        return f1(u) * (1.0 - 5.0 * (1.0 - u) ** 2)

    def f2p(u):
        u = np.asarray(u, dtype=float)
        return f1p(u) * (1.0 - 5.0 * (1.0 - u) ** 2) + f1(u) * 10.0 * (1.0 - u)

    def u0(x, y):
        return np.where(np.asarray(x) ** 2 + np.asarray(y) ** 2 < 0.5, 1.0, 0.0)

    us = np.linspace(0.0, 1.0, 2001)
    a1, a2 = f1p(us), f2p(us)
    theta = math.sqrt(0.05)
    # smallest common lambda satisfying the 2D monotonicity condition with 5% margin
    worst = np.max(np.maximum.reduce([2 * a1 - a2, -a1 + 2 * a2, -a1 - a2]))
    lam = 1.05 * float(worst) / (1.0 - 0.01 / theta**2)
    return Problem(
        name="bl_2d",
        dim=2,
        K=1,
        flux=(f1, f2),
        flux_prime=(f1p, f2p),
        B=_identity,
        B_prime=_one,
        xi=0.01,
        u0=u0,
        domain=((-1.5, 1.5), (-1.5, 1.5)),
        boundary=BoundaryRule.ZERO_GRADIENT,
        t_end=0.5,
        cells=(200, 200),
        state_box=((0.0, 1.0),),
        model_kind=ModelKind.DRM1_2D,
        model_params={"lambda1": lam, "lambda2": lam, "theta": theta, "mu": 0.0},
        discontinuous=True,
        scheme=SchemeSpec("cweno3", 2, limiter="bounds"),
        tableau="euler",
        cfl_C=0.4,
        epsilon=1e-7,
        description="2D Buckley-Leverett with gravity in y and linear diffusion",
        notes=("CWENO3 for hyperbolic populations, second-order centred stencil for parabolic ones",),
    )


_BUILDERS: dict[str, Callable[..., Problem]] = {
    "linear_diffusion": _linear_diffusion,
    "advection_diffusion": _advection_diffusion,
    "viscous_lwr": _lwr,
    "burgers_steady_shock": _steady_shock,
    "burgers_strongly_degenerate": _strongly_degenerate,
    "burgers_2d_degenerate": _burgers_2d,
    "three_phase": _three_phase,
    "bl_gravity": _bl_gravity,
    "bl_2d": _bl_2d,
}

CATALOG_NAMES: tuple[str, ...] = tuple(_BUILDERS)


def catalog(name: str, **options: float) -> Problem:
    """Build a catalog entry; keyword options select variants (``xi``, ``g``, ``a``)."""
    try:
        builder = _BUILDERS[name]
    except KeyError as exc:
        raise ParameterError(f"unknown problem {name!r}; choose from {', '.join(CATALOG_NAMES)}") from exc
    return builder(**options)


def evaluate_exact(problem: Problem, *args: float | np.ndarray) -> np.ndarray:
    """Evaluate the exact solution at ``(x, t)`` or ``(x, y, t)``."""
    if problem.exact is None:
        raise MissingExactSolution(f"problem {problem.name!r} has no exact solution")
    return np.asarray(problem.exact(*args), dtype=float)


def check_recommended(problem: Problem, n_samples: int = 1001):
    """Monotonicity report of the recommended model on the problem's state box."""
    return check_mmf(problem.model(), problem.state_box, n_samples)


__all__ += ["check_recommended"]
