"""Discrete-kinetic BGK models: velocities, Maxwellians and admissibility checks.

A model couples a macroscopic advection--diffusion system

    u_t + sum_d d_{x_d} A_d(u) = sum_d d_{x_d x_d} B(u)

to ``L`` kinetic populations ``f_l`` moving with (possibly epsilon-dependent)
velocities and relaxing towards a Maxwellian ``M(u)`` with ``u = sum_l f_l``.

State arrays follow one convention throughout the package: the macroscopic
state has shape ``(K, *cells)`` and a kinetic field has shape
``(L, K, *cells)``.  Flux and diffusion callables map ``(K, *cells)`` arrays to
arrays of the same shape.
"""

from __future__ import annotations

import enum
import math
import warnings
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

Array = np.ndarray
StateMap = Callable[[Array], Array]

__all__ = [
    "ModelKind",
    "KineticModel",
    "AdmissibilityReport",
    "ParameterError",
    "DegeneracyError",
    "AdmissibilityWarning",
    "build_drm1_1d",
    "build_drm2_1d",
    "build_ovm_1d",
    "build_drm1_2d",
    "maxwellian",
    "project",
    "check_mmf",
    "compute_lambda_bounds",
    "moment_residuals",
    "derivative",
    "zero_map",
    "identity_map",
    "DEFAULT_SIGMA_BASIS",
]


class ParameterError(ValueError):
    """Invalid model or scheme parameter."""


class DegeneracyError(ParameterError):
    """Raised when ``1 - B'/theta^2`` vanishes, i.e. theta is too small."""


class AdmissibilityWarning(UserWarning):
    """The chosen constants may violate the monotonicity requirements."""


class ModelKind(str, enum.Enum):
    DRM1_1D = "drm1_1d"
    DRM2_1D = "drm2_1d"
    OVM_1D = "ovm_1d"
    DRM1_2D = "drm1_2d"


DEFAULT_SIGMA_BASIS = np.array(
    [
        [1.0, -1.0, 0.0],
        [1.0, 1.0, -2.0],
    ]
) / np.array([[math.sqrt(2.0)], [math.sqrt(6.0)]])


def zero_map(u: Array) -> Array:
    return np.zeros_like(u)


def identity_map(u: Array) -> Array:
    return np.array(u, dtype=float, copy=True)


def derivative(fn: StateMap, u: Array) -> Array:
    """Diagonal derivative of a componentwise map by 4th-order central differences.

    The step is ``h = max(1e-6, 1e-6 |u|)``.  Only the diagonal of the
    Jacobian is returned (``d fn_k / d u_k``); use :func:`jacobian` when the
    map couples components.
    """
    u = np.asarray(u, dtype=float)
    h = np.maximum(1e-6, 1e-6 * np.abs(u))
    out = np.empty_like(u)
    for k in range(u.shape[0]):
        def shifted(s: float) -> Array:
            v = u.copy()
            v[k] = u[k] + s * h[k]
            return np.asarray(fn(v), dtype=float)[k]

        out[k] = (
            -shifted(2.0) + 8.0 * shifted(1.0) - 8.0 * shifted(-1.0) + shifted(-2.0)
        ) / (12.0 * h[k])
    return out


def jacobian(fn: StateMap, u: Array) -> Array:
    """Full Jacobian ``J[i, j] = d fn_i / d u_j`` of a map at states ``u``.

    ``u`` has shape ``(K, n)``; the result has shape ``(K, K, n)``.
    """
    u = np.asarray(u, dtype=float)
    K = u.shape[0]
    h = np.maximum(1e-6, 1e-6 * np.abs(u))
    jac = np.empty((K,) + u.shape, dtype=float)
    for j in range(K):
        cols = []
        for s in (2.0, 1.0, -1.0, -2.0):
            v = u.copy()
            v[j] = u[j] + s * h[j]
            cols.append(np.asarray(fn(v), dtype=float))
        jac[:, j] = (-cols[0] + 8.0 * cols[1] - 8.0 * cols[2] + cols[3]) / (12.0 * h[j])
    return jac


@dataclass(frozen=True, eq=False)
class KineticModel:
    """An immutable discrete-kinetic relaxation model.

    ``lam`` and ``theta_part`` hold the velocity decomposition
    ``gamma_ld = lam_ld + theta_ld / sqrt(eps)``; ``velocities`` is the sum.
    The first ``n_hyperbolic`` populations use an upwind-type stencil, the
    remaining ``n_parabolic`` populations a centred stencil.
    """

    kind: ModelKind
    dim: int
    n_components: int
    n_hyperbolic: int
    n_parabolic: int
    lam: Array
    theta_part: Array
    epsilon: float
    params: dict[str, float]
    flux: tuple[StateMap, ...]
    diffusion: StateMap
    flux_prime: tuple[StateMap | None, ...] = ()
    diffusion_prime: StateMap | None = None
    sigma_basis: Array | None = None

    @property
    def n_velocities(self) -> int:
        return self.n_hyperbolic + self.n_parabolic

    @property
    def velocities(self) -> Array:
        return self.lam + self.theta_part / math.sqrt(self.epsilon)

    def with_epsilon(self, epsilon: float) -> "KineticModel":
        """Same model with a different relaxation parameter."""
        builder = _REBUILDERS[self.kind]
        return builder(self, epsilon)

    def describe(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "dim": self.dim,
            "K": self.n_components,
            "L": self.n_velocities,
            "epsilon": self.epsilon,
            **self.params,
        }


@dataclass
class AdmissibilityReport:
    """Outcome of a monotone-Maxwellian (subcharacteristic) check."""

    is_mmf: bool
    max_condition_value: float
    violating_state: Array | None
    condition_kind: str
    tolerance: float = 1e-12
    n_samples: int = 0
    details: dict[str, float] = field(default_factory=dict)


# ----------------------------------------------------------------------------
# validation helpers


def _check_epsilon(epsilon: float) -> float:
    epsilon = float(epsilon)
    if not (0.0 < epsilon <= 1.0) or not math.isfinite(epsilon):
        raise ParameterError(f"epsilon must lie in (0, 1], got {epsilon!r}")
    return epsilon


def _check_positive(name: str, value: float) -> float:
    value = float(value)
    if not (value > 0.0) or not math.isfinite(value):
        raise ParameterError(f"{name} must be strictly positive, got {value!r}")
    return value


def _check_nonnegative(name: str, value: float) -> float:
    value = float(value)
    if value < 0.0 or not math.isfinite(value):
        raise ParameterError(f"{name} must be nonnegative, got {value!r}")
    return value


def _as_state(u: Array, K: int) -> Array:
    u = np.asarray(u, dtype=float)
    if u.ndim == 0:
        u = u.reshape(1, 1)
    if u.shape[0] != K:
        if K == 1:
            u = u.reshape((1,) + u.shape)
        else:
            raise ParameterError(f"state has leading dimension {u.shape[0]}, expected K={K}")
    return u


# ----------------------------------------------------------------------------
# builders


def build_drm1_1d(
    lam: float,
    theta: float,
    mu: float,
    epsilon: float,
    A: StateMap = identity_map,
    B: StateMap = identity_map,
    *,
    n_components: int = 1,
    A_prime: StateMap | None = None,
    B_prime: StateMap | None = None,
) -> KineticModel:
    """Four-velocity diagonal relaxation model with a symmetric pair ``-lam, lam``."""
    lam = _check_positive("lambda", lam)
    theta = _check_positive("theta", theta)
    mu = _check_nonnegative("mu", mu)
    epsilon = _check_epsilon(epsilon)
    s = mu / math.sqrt(2.0)
    lam_part = np.array([[-lam, lam, -s, s]])
    theta_part = np.array([[0.0, 0.0, -theta, theta]])
    return KineticModel(
        kind=ModelKind.DRM1_1D,
        dim=1,
        n_components=n_components,
        n_hyperbolic=2,
        n_parabolic=2,
        lam=lam_part,
        theta_part=theta_part,
        epsilon=epsilon,
        params={"lambda": lam, "theta": theta, "mu": mu},
        flux=(A,),
        diffusion=B,
        flux_prime=(A_prime,),
        diffusion_prime=B_prime,
    )


def build_drm2_1d(
    lambda_m: float,
    lambda_p: float,
    theta: float,
    mu: float,
    epsilon: float,
    A: StateMap = identity_map,
    B: StateMap = identity_map,
    *,
    n_components: int = 1,
    A_prime: StateMap | None = None,
    B_prime: StateMap | None = None,
) -> KineticModel:
    """Four-velocity model with asymmetric hyperbolic velocities ``lambda_m < lambda_p``."""
    lambda_m = float(lambda_m)
    lambda_p = float(lambda_p)
    if not (lambda_m < lambda_p):
        raise ParameterError(f"need lambda_m < lambda_p, got {lambda_m} >= {lambda_p}")
    theta = _check_positive("theta", theta)
    mu = _check_nonnegative("mu", mu)
    epsilon = _check_epsilon(epsilon)
    s = mu / math.sqrt(2.0)
    return KineticModel(
        kind=ModelKind.DRM2_1D,
        dim=1,
        n_components=n_components,
        n_hyperbolic=2,
        n_parabolic=2,
        lam=np.array([[lambda_m, lambda_p, -s, s]]),
        theta_part=np.array([[0.0, 0.0, -theta, theta]]),
        epsilon=epsilon,
        params={"lambda_m": lambda_m, "lambda_p": lambda_p, "theta": theta, "mu": mu},
        flux=(A,),
        diffusion=B,
        flux_prime=(A_prime,),
        diffusion_prime=B_prime,
    )


def build_ovm_1d(
    lam: float,
    theta: float,
    epsilon: float,
    A: StateMap = identity_map,
    B: StateMap = identity_map,
    *,
    n_components: int = 1,
    A_prime: StateMap | None = None,
    B_prime: StateMap | None = None,
    state_interval: tuple[float, float] | None = None,
) -> KineticModel:
    """Three-velocity model: one resting population and a fast symmetric pair.

    The moving pair travels with ``±(lam + theta/sqrt(eps))`` and the
    Maxwellian is ``(u - B/theta^2, A/(2 Lam) + B/(2 theta^2), -A/(2 Lam) + B/(2 theta^2))``
    with ``Lam = lam + theta/sqrt(eps)``; it sums to ``u`` and reproduces the
    flux and diffusion moments.

    When ``state_interval`` is given, a warning is emitted if
    ``theta^2 <= max B'`` on that interval.
    """
    lam = _check_nonnegative("lambda", lam)
    theta = _check_positive("theta", theta)
    epsilon = _check_epsilon(epsilon)
    model = KineticModel(
        kind=ModelKind.OVM_1D,
        dim=1,
        n_components=n_components,
        n_hyperbolic=1,
        n_parabolic=2,
        lam=np.array([[0.0, lam, -lam]]),
        theta_part=np.array([[0.0, theta, -theta]]),
        epsilon=epsilon,
        params={"lambda": lam, "theta": theta},
        flux=(A,),
        diffusion=B,
        flux_prime=(A_prime,),
        diffusion_prime=B_prime,
    )
    if state_interval is not None:
        lo, hi = state_interval
        us = np.linspace(lo, hi, 201)
        states = np.broadcast_to(us, (n_components, us.size)).copy()
        bp = _diag_derivative(B, B_prime, states)
        if theta**2 <= float(np.max(bp)):
            warnings.warn(
                f"theta^2 = {theta**2:g} does not exceed max B' = {float(np.max(bp)):g}; "
                "monotonicity is not guaranteed",
                AdmissibilityWarning,
                stacklevel=2,
            )
    return model


def build_drm1_2d(
    lambda1: float,
    lambda2: float,
    theta: float,
    mu: float,
    epsilon: float,
    A1: StateMap = identity_map,
    A2: StateMap = identity_map,
    B: StateMap = identity_map,
    *,
    n_components: int = 1,
    sigma_basis: Array | None = None,
    A1_prime: StateMap | None = None,
    A2_prime: StateMap | None = None,
    B_prime: StateMap | None = None,
) -> KineticModel:
    """Six-velocity two-dimensional diagonal relaxation model (J = J' = 3).

    Hyperbolic velocities are ``(-lambda1, 0)``, ``(0, -lambda2)`` and
    ``(lambda1, lambda2)``; parabolic ones are
    ``(mu + theta sqrt(3)/sqrt(eps)) (sigma1_m, sigma2_m)`` for an orthonormal
    zero-sum pair ``sigma1, sigma2``.
    """
    lambda1 = _check_positive("lambda1", lambda1)
    lambda2 = _check_positive("lambda2", lambda2)
    theta = _check_positive("theta", theta)
    mu = _check_nonnegative("mu", mu)
    epsilon = _check_epsilon(epsilon)
    sigma = DEFAULT_SIGMA_BASIS if sigma_basis is None else np.asarray(sigma_basis, dtype=float)
    if sigma.shape != (2, 3):
        raise ParameterError(f"sigma basis must have shape (2, 3), got {sigma.shape}")
    if not np.allclose(sigma.sum(axis=1), 0.0, atol=1e-12):
        raise ParameterError("sigma basis vectors must sum to zero")
    if not np.allclose(sigma @ sigma.T, np.eye(2), atol=1e-12):
        raise ParameterError("sigma basis must be orthonormal")
    jp = 3
    lam_part = np.array(
        [
            [-lambda1, 0.0, lambda1, *(mu * sigma[0])],
            [0.0, -lambda2, lambda2, *(mu * sigma[1])],
        ]
    )
    theta_part = np.zeros((2, 6))
    theta_part[:, 3:] = theta * math.sqrt(jp) * sigma
    return KineticModel(
        kind=ModelKind.DRM1_2D,
        dim=2,
        n_components=n_components,
        n_hyperbolic=3,
        n_parabolic=3,
        lam=lam_part,
        theta_part=theta_part,
        epsilon=epsilon,
        params={"lambda1": lambda1, "lambda2": lambda2, "theta": theta, "mu": mu},
        flux=(A1, A2),
        diffusion=B,
        flux_prime=(A1_prime, A2_prime),
        diffusion_prime=B_prime,
        sigma_basis=sigma.copy(),
    )


def _rebuild_drm1_1d(m: KineticModel, eps: float) -> KineticModel:
    p = m.params
    return build_drm1_1d(
        p["lambda"], p["theta"], p["mu"], eps, m.flux[0], m.diffusion,
        n_components=m.n_components, A_prime=m.flux_prime[0], B_prime=m.diffusion_prime,
    )


def _rebuild_drm2_1d(m: KineticModel, eps: float) -> KineticModel:
    p = m.params
    return build_drm2_1d(
        p["lambda_m"], p["lambda_p"], p["theta"], p["mu"], eps, m.flux[0], m.diffusion,
        n_components=m.n_components, A_prime=m.flux_prime[0], B_prime=m.diffusion_prime,
    )


def _rebuild_ovm_1d(m: KineticModel, eps: float) -> KineticModel:
    p = m.params
    return build_ovm_1d(
        p["lambda"], p["theta"], eps, m.flux[0], m.diffusion,
        n_components=m.n_components, A_prime=m.flux_prime[0], B_prime=m.diffusion_prime,
    )


def _rebuild_drm1_2d(m: KineticModel, eps: float) -> KineticModel:
    p = m.params
    return build_drm1_2d(
        p["lambda1"], p["lambda2"], p["theta"], p["mu"], eps, m.flux[0], m.flux[1], m.diffusion,
        n_components=m.n_components, sigma_basis=m.sigma_basis,
        A1_prime=m.flux_prime[0], A2_prime=m.flux_prime[1], B_prime=m.diffusion_prime,
    )


_REBUILDERS = {
    ModelKind.DRM1_1D: _rebuild_drm1_1d,
    ModelKind.DRM2_1D: _rebuild_drm2_1d,
    ModelKind.OVM_1D: _rebuild_ovm_1d,
    ModelKind.DRM1_2D: _rebuild_drm1_2d,
}


# ----------------------------------------------------------------------------
# Maxwellians


def maxwellian(model: KineticModel, u: Array, *, limit: bool = False) -> Array:
    """Evaluate ``M(eps, u)``; shape ``(L, K, *cells)``.

    With ``limit=True`` the epsilon -> 0 limit ``M(0, u)`` is returned (only
    differs from the default for the three-velocity model).
    """
    u = np.asarray(u, dtype=float)
    kind = model.kind
    p = model.params
    Bu = np.asarray(model.diffusion(u), dtype=float)
    out = np.empty((model.n_velocities,) + u.shape, dtype=float)
    if kind is ModelKind.DRM1_1D:
        lam, th2 = p["lambda"], p["theta"] ** 2
        Au = np.asarray(model.flux[0](u), dtype=float)
        w = u - Bu / th2
        a = Au / lam
        out[0] = 0.5 * (w - a)
        out[1] = 0.5 * (w + a)
        out[2] = 0.5 * Bu / th2
        out[3] = out[2]
    elif kind is ModelKind.DRM2_1D:
        lm, lp, th2 = p["lambda_m"], p["lambda_p"], p["theta"] ** 2
        Au = np.asarray(model.flux[0](u), dtype=float)
        w = u - Bu / th2
        out[0] = (lp * w - Au) / (lp - lm)
        out[1] = (-lm * w + Au) / (lp - lm)
        out[2] = 0.5 * Bu / th2
        out[3] = out[2]
    elif kind is ModelKind.OVM_1D:
        lam, theta = p["lambda"], p["theta"]
        th2 = theta**2
        out[0] = u - Bu / th2
        if limit:
            half_a = np.zeros_like(u)
        else:
            big = lam + theta / math.sqrt(model.epsilon)
            Au = np.asarray(model.flux[0](u), dtype=float)
            half_a = Au / (2.0 * big)
        out[1] = half_a + 0.5 * Bu / th2
        out[2] = -half_a + 0.5 * Bu / th2
    elif kind is ModelKind.DRM1_2D:
        l1, l2, th2 = p["lambda1"], p["lambda2"], p["theta"] ** 2
        a1 = np.asarray(model.flux[0](u), dtype=float) / l1
        a2 = np.asarray(model.flux[1](u), dtype=float) / l2
        w = u - Bu / th2
        out[0] = (w - 2.0 * a1 + a2) / 3.0
        out[1] = (w + a1 - 2.0 * a2) / 3.0
        out[2] = (w + a1 + a2) / 3.0
        out[3:] = Bu / (3.0 * th2)
    else:  # pragma: no cover - exhaustive enum
        raise ParameterError(f"unknown model kind {kind}")
    return out


def project(f: Array) -> Array:
    """Macroscopic state ``u = sum_l f_l`` (sum over the leading axis)."""
    f = np.asarray(f)
    return f.sum(axis=0)


def moment_residuals(model: KineticModel, u: Array) -> dict[str, float]:
    """Largest relative violations of the three moment identities at states ``u``.

    * ``M1``: ``sum_l M_l(u) = u``
    * ``M2``: ``sum_l gamma_ld M_l(eps,u) - A_d(u) - eps^-1/2 sum_l theta_ld M_l(0,u) = 0``
    * ``M3``: ``sum_l theta_ld theta_lj M_l(0,u) = delta_dj B(u)``
    """
    u = _as_state(u, model.n_components)
    M = maxwellian(model, u)
    M0 = maxwellian(model, u, limit=True)
    Bu = np.asarray(model.diffusion(u), dtype=float)
    scale = 1.0 + np.abs(u)
    m1 = float(np.max(np.abs(project(M) - u) / scale))
    gam = model.velocities
    m2 = 0.0
    m3 = 0.0
    sq = math.sqrt(model.epsilon)
    extra = (slice(None),) + (None,) * u.ndim
    for d in range(model.dim):
        Ad = np.asarray(model.flux[d](u), dtype=float)
        mom = (gam[d][extra] * M).sum(axis=0)
        corr = (model.theta_part[d][extra] * M0).sum(axis=0) / sq
        # relative to the size of the individual terms
        ref = 1.0 + np.abs(Ad) + np.abs(gam[d][extra] * M).sum(axis=0)
        m2 = max(m2, float(np.max(np.abs(mom - Ad - corr) / ref)))
        for j in range(model.dim):
            sec = (model.theta_part[d][extra] * model.theta_part[j][extra] * M0).sum(axis=0)
            target = Bu if d == j else np.zeros_like(Bu)
            m3 = max(m3, float(np.max(np.abs(sec - target) / (1.0 + np.abs(Bu)))))
    return {"M1": m1, "M2": m2, "M3": m3}


# ----------------------------------------------------------------------------
# admissibility


def _diag_derivative(fn: StateMap, fprime: StateMap | None, u: Array) -> Array:
    if fprime is not None:
        return np.asarray(fprime(u), dtype=float)
    return derivative(fn, u)


def _spectral_extent(fn: StateMap, fprime: StateMap | None, u: Array) -> tuple[Array, Array]:
    """(min, max) of the real parts of the eigenvalues of ``fn'`` at each state."""
    if u.shape[0] == 1:
        d = _diag_derivative(fn, fprime, u)[0]
        return d, d
    jac = jacobian(fn, u)
    ev = np.linalg.eigvals(np.moveaxis(jac, -1, 0)).real
    return ev.min(axis=1), ev.max(axis=1)


def _sample_box(state_box: Sequence[tuple[float, float]] | tuple[float, float], K: int,
                n_samples: int) -> Array:
    box = np.asarray(state_box, dtype=float)
    if box.ndim == 1:
        box = np.broadcast_to(box, (K, 2))
    if box.shape != (K, 2):
        raise ParameterError(f"state box must give one interval per component, got {box.shape}")
    if np.any(box[:, 1] < box[:, 0]):
        raise ParameterError("empty state box (upper bound below lower bound)")
    if n_samples < 1:
        raise ParameterError("n_samples must be positive")
    if K == 1:
        return np.linspace(box[0, 0], box[0, 1], n_samples).reshape(1, -1)
    per_axis = max(2, int(round(n_samples ** (1.0 / K))))
    axes = [np.linspace(lo, hi, per_axis) for lo, hi in box]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh])


def check_mmf(
    model: KineticModel,
    state_box: Sequence[tuple[float, float]] | tuple[float, float],
    n_samples: int = 1001,
    *,
    tolerance: float | None = None,
) -> AdmissibilityReport:
    """Sample the model-specific monotonicity condition over a box of states.

    The condition value is normalised so that the Maxwellian is monotone when
    it does not exceed one.  The default tolerance is ``1e-12`` when every
    flux and diffusion derivative is supplied in closed form and ``1e-8``
    when some are finite-differenced (their rounding error is about
    ``1e-16 / h`` with ``h ~ 1e-6``).
    """
    if tolerance is None:
        supplied = model.diffusion_prime is not None and len(model.flux_prime) == model.dim and all(
            fp is not None for fp in model.flux_prime
        )
        tolerance = 1e-12 if supplied else 1e-8
    K = model.n_components
    u = _sample_box(state_box, K, n_samples)
    kind = model.kind
    p = model.params
    _, bmax = _spectral_extent(model.diffusion, model.diffusion_prime, u)
    details: dict[str, float] = {}
    if kind is ModelKind.DRM1_1D:
        amin, amax = _spectral_extent(model.flux[0], model.flux_prime[0], u)
        value = np.maximum(np.abs(amin), np.abs(amax)) / p["lambda"] + bmax / p["theta"] ** 2
        label = "|A'|/lambda + B'/theta^2 <= 1"
    elif kind is ModelKind.DRM2_1D:
        amin, amax = _spectral_extent(model.flux[0], model.flux_prime[0], u)
        lm, lp = p["lambda_m"], p["lambda_p"]
        s = 1.0 - bmax / p["theta"] ** 2
        excess = np.maximum(amax - lp * s, lm * s - amin) / (lp - lm)
        value = np.maximum(bmax / p["theta"] ** 2, 1.0 + excess)
        label = "lambda_m (1 - B'/theta^2) <= A' <= lambda_p (1 - B'/theta^2)"
    elif kind is ModelKind.OVM_1D:
        amin, amax = _spectral_extent(model.flux[0], model.flux_prime[0], u)
        big = p["lambda"] + p["theta"] / math.sqrt(model.epsilon)
        amag = np.maximum(np.abs(amin), np.abs(amax)) / big
        bscaled = bmax / p["theta"] ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(bscaled > 0, amag / np.where(bscaled > 0, bscaled, 1.0),
                             np.where(amag > 0, np.inf, 0.0))
        value = np.maximum(bscaled, ratio)
        label = "B'/theta^2 <= 1 and |A'|/(lambda + theta/sqrt(eps)) <= B'/theta^2"
    elif kind is ModelKind.DRM1_2D:
        a1min, a1max = _spectral_extent(model.flux[0], model.flux_prime[0], u)
        a2min, a2max = _spectral_extent(model.flux[1], model.flux_prime[1], u)
        l1, l2 = p["lambda1"], p["lambda2"]
        # worst case over the spectral interval of each flux derivative
        c1 = np.maximum(2 * a1max / l1 - a2min / l2, 2 * a1min / l1 - a2max / l2)
        c2 = np.maximum(-a1min / l1 + 2 * a2max / l2, -a1max / l1 + 2 * a2min / l2)
        c3 = -a1min / l1 - a2min / l2
        value = np.maximum(np.maximum(c1, c2), c3) + bmax / p["theta"] ** 2
        value = np.maximum(value, bmax / p["theta"] ** 2)
        label = "max(2A1'/l1 - A2'/l2, -A1'/l1 + 2A2'/l2, -A1'/l1 - A2'/l2) <= 1 - B'/theta^2"
    else:  # pragma: no cover
        raise ParameterError(f"unknown model kind {kind}")
    value = np.asarray(value, dtype=float)
    idx = int(np.argmax(value))
    vmax = float(value[idx])
    bad = np.nonzero(value > 1.0 + tolerance)[0]
    violating = u[:, bad[0]].copy() if bad.size else None
    details["argmax_index"] = float(idx)
    return AdmissibilityReport(
        is_mmf=bool(vmax <= 1.0 + tolerance),
        max_condition_value=vmax,
        violating_state=violating,
        condition_kind=label,
        tolerance=tolerance,
        n_samples=u.shape[1],
        details=details,
    )


def compute_lambda_bounds(
    A_prime: Callable[[Array], Array],
    B_prime: Callable[[Array], Array],
    theta: float,
    interval: tuple[float, float],
    n_samples: int = 1001,
    *,
    safety: float = 1.0,
) -> tuple[float, float]:
    """Sampled ``inf``/``sup`` of ``A'/(1 - B'/theta^2)`` over an interval.

    ``safety > 1`` widens the bounds outwards multiplicatively (a positive
    upper bound is multiplied, a positive lower bound divided, and vice
    versa for negative values).  The catalog uses ``safety=1.05``.
    """
    theta = _check_positive("theta", theta)
    lo, hi = interval
    if hi < lo:
        raise ParameterError("empty interval")
    u = np.linspace(lo, hi, n_samples)
    ap = np.broadcast_to(np.asarray(A_prime(u), dtype=float), u.shape)
    bp = np.broadcast_to(np.asarray(B_prime(u), dtype=float), u.shape)
    den = 1.0 - bp / theta**2
    if np.any(den <= 0.0):
        worst = float(u[np.argmin(den)])
        raise DegeneracyError(
            f"1 - B'/theta^2 <= 0 at u = {worst:g}; increase theta above sqrt(max B')"
        )
    ratio = ap / den
    lm, lp = float(ratio.min()), float(ratio.max())
    if safety != 1.0:
        lm = lm / safety if lm > 0 else lm * safety
        lp = lp * safety if lp > 0 else lp / safety
    return lm, lp
