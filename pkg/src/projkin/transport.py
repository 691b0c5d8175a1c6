"""Spatial discretisation of the kinetic transport term ``Gamma_d d_{x_d} f``.

Hyperbolic populations use upwind-biased stencils (orders 1, 3, 4) or a
third-order central WENO reconstruction; parabolic populations use centred
stencils (orders 2, 4).  Linear stencils are assembled once into sparse
matrices with the boundary rule baked in, so a transport sweep is one sparse
matrix product per call.

Every stencil is stored as a derivative approximation
``d_x f(x_i) ~ sum_j c_j f_{i+j} / dx``; the coefficients sum to zero.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Literal, Union

import numpy as np
import scipy.sparse as sp

from .core import N_GHOST, BoundaryRule, Grid, fill_ghosts, ghost_index
from .model import KineticModel, ParameterError, maxwellian, project

__all__ = [
    "Stencil",
    "STENCILS",
    "SchemeSpec",
    "TransportOperator",
    "SemiDiscreteOperator",
    "stencil_for",
    "derivative_matrix",
    "advective_derivative",
    "cweno3_derivative",
    "cweno3_reconstruct",
    "semidiscrete_rhs",
]

HyperbolicOrder = Union[int, Literal["cweno3"]]


@dataclass(frozen=True)
class Stencil:
    """Derivative stencil: ``d_x f(x_i) ~ sum_j coeffs[j] * f[i + offsets[j]] / dx``."""

    offsets: tuple[int, ...]
    coeffs: tuple[float, ...]

    def mirrored(self) -> "Stencil":
        """Reflection ``i + j -> i - j``; turns a right-moving stencil into a left-moving one."""
        pairs = sorted((-o, -c) for o, c in zip(self.offsets, self.coeffs))
        return Stencil(tuple(o for o, _ in pairs), tuple(c for _, c in pairs))

    def symbol(self, zeta: np.ndarray | float, dx: float = 1.0) -> np.ndarray:
        """Fourier symbol: action on ``exp(i k x)`` divided by that mode, with ``zeta = k dx``."""
        zeta = np.asarray(zeta, dtype=float)
        out = np.zeros(zeta.shape, dtype=complex)
        for o, c in zip(self.offsets, self.coeffs):
            out = out + c * np.exp(1j * o * zeta)
        return out / dx


# Right-moving (gamma > 0) derivative stencils and centred stencils.
_UP1 = Stencil((-1, 0), (-1.0, 1.0))
_UP3 = Stencil((-2, -1, 0, 1), (1.0 / 6.0, -1.0, 0.5, 1.0 / 3.0))
_UP4 = Stencil((-3, -2, -1, 0, 1), (-1.0 / 12.0, 0.5, -1.5, 10.0 / 12.0, 0.25))
_C2 = Stencil((-1, 1), (-0.5, 0.5))
_C4 = Stencil((-2, -1, 1, 2), (1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0))

STENCILS: dict[tuple[str, int], Stencil] = {
    ("upwind", 1): _UP1,
    ("upwind", 3): _UP3,
    ("upwind", 4): _UP4,
    ("centered", 2): _C2,
    ("centered", 4): _C4,
}


def stencil_for(kind: str, order: int, gamma: float) -> Stencil:
    """Stencil of the given family and order for a velocity of sign ``gamma``.

    Upwind stencils lean against the flow: the ``gamma >= 0`` form is stored
    and the ``gamma < 0`` form is its mirror image.  ``gamma == 0`` takes the
    positive branch (the result is multiplied by zero anyway).
    """
    try:
        base = STENCILS[(kind, int(order))]
    except KeyError as exc:
        raise ParameterError(f"no {kind} stencil of order {order}") from exc
    if kind == "upwind" and gamma < 0:
        return base.mirrored()
    return base


def derivative_matrix(stencil: Stencil, n: int, dx: float, rule: BoundaryRule | str) -> sp.csr_matrix:
    """Sparse ``n x n`` matrix of a derivative stencil with ghost cells folded in."""
    src = ghost_index(n, rule, N_GHOST)
    rows, cols, vals = [], [], []
    i = np.arange(n)
    for o, c in zip(stencil.offsets, stencil.coeffs):
        if abs(o) > N_GHOST:
            raise ParameterError("stencil wider than the ghost layer")
        rows.append(i)
        cols.append(src[i + o + N_GHOST])
        vals.append(np.full(n, c / dx))
    mat = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )
    return mat.tocsr()  # duplicates (zero-gradient boundary) are summed


def advective_derivative(
    order: int,
    gamma: float,
    row: np.ndarray,
    dx: float,
    *,
    kind: str = "upwind",
    boundary: BoundaryRule | str = BoundaryRule.PERIODIC,
    i: int | None = None,
) -> np.ndarray | float:
    """Approximate ``gamma * d_x f`` on a 1D row of cell values.

    Returns the whole row, or cell ``i`` only when ``i`` is given.
    """
    row = np.asarray(row, dtype=float)
    if gamma == 0.0:
        out = np.zeros_like(row)
        return out if i is None else float(out[i])
    st = stencil_for(kind, order, gamma)
    padded = fill_ghosts(row, boundary, dim=1)
    n = row.shape[-1]
    acc = np.zeros_like(row)
    for o, c in zip(st.offsets, st.coeffs):
        acc = acc + c * padded[..., N_GHOST + o : N_GHOST + o + n]
    out = gamma * acc / dx
    return out if i is None else float(out[..., i])


# ----------------------------------------------------------------------------
# CWENO3


def cweno3_reconstruct(padded: np.ndarray, eps_weno: float = 1e-6, p: int = 2,
                       bounded: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Left/right face values of each cell from a row padded by at least one ghost.

    Returns ``(u_minus_half, u_plus_half)`` for the cells ``1 .. n-2`` of
    ``padded`` (last axis).  The reconstruction blends two linear candidates
    and a central parabola-derived candidate with nonlinear weights
    ``alpha_k = C_k / (eps_weno + IS_k)^p``, optimal weights ``(1/4, 1/2, 1/4)``.

    With ``bounded=True`` the deviation of both face values from the cell
    average is scaled by a common factor in ``[0, 1]`` so that they stay
    within the range of the three neighbouring averages.
    """
    um = padded[..., :-2]
    u0 = padded[..., 1:-1]
    up = padded[..., 2:]
    d_left = u0 - um
    d_right = up - u0
    d2 = up - 2.0 * u0 + um
    d1 = 0.5 * (up - um)
    is_l = d_left**2
    is_r = d_right**2
    is_c = 13.0 / 3.0 * d2**2 + d1**2
    a_l = 0.25 / (eps_weno + is_l) ** p
    a_r = 0.25 / (eps_weno + is_r) ** p
    a_c = 0.5 / (eps_weno + is_c) ** p
    s = a_l + a_r + a_c
    w_l, w_r, w_c = a_l / s, a_r / s, a_c / s

    def at(xi: float) -> np.ndarray:
        p_l = u0 + d_left * xi
        p_r = u0 + d_right * xi
        p_opt = u0 - d2 / 24.0 + d1 * xi + d2 * xi * xi
        p_c = 2.0 * p_opt - 0.5 * p_l - 0.5 * p_r
        return w_l * p_l + w_r * p_r + w_c * p_c

    left, right = at(-0.5), at(0.5)
    if bounded:
        left, right = _scale_into_bounds(u0, left, right, np.minimum(np.minimum(um, u0), up),
                                         np.maximum(np.maximum(um, u0), up))
    return left, right


def _scale_into_bounds(mean, left, right, lo, hi):
    """Shrink ``left``/``right`` towards ``mean`` until both lie in ``[lo, hi]``."""
    top = np.maximum(left, right) - mean
    bot = np.minimum(left, right) - mean
    tiny = np.finfo(float).tiny
    with np.errstate(divide="ignore", invalid="ignore"):
        s_hi = np.where(top > 0, (hi - mean) / np.maximum(top, tiny), 1.0)
        s_lo = np.where(bot < 0, (lo - mean) / np.minimum(bot, -tiny), 1.0)
    scale = np.clip(np.minimum(s_hi, s_lo), 0.0, 1.0)
    return mean + scale * (left - mean), mean + scale * (right - mean)


def _cweno3_along_last(values: np.ndarray, gamma: float, dx: float, rule: BoundaryRule | str,
                       eps_weno: float, p: int, bounded: bool = False) -> np.ndarray:
    padded = fill_ghosts(values, rule, dim=1, n_ghost=2)
    left, right = cweno3_reconstruct(padded, eps_weno, p, bounded)  # cells -1 .. n
    if gamma >= 0:
        face = right[..., :-1]  # face j+1/2 for j = -1 .. n-1, upwind cell j
    else:
        face = left[..., 1:]  # from cell j+1
    return gamma * (face[..., 1:] - face[..., :-1]) / dx  # length n


def cweno3_derivative(
    gamma: float,
    row: np.ndarray,
    dx: float,
    *,
    boundary: BoundaryRule | str = BoundaryRule.PERIODIC,
    eps_weno: float = 1e-6,
    p: int = 2,
    bounded: bool = False,
    i: int | None = None,
) -> np.ndarray | float:
    """Approximate ``gamma * d_x f`` by upwinded CWENO3 interface values."""
    out = _cweno3_along_last(np.asarray(row, dtype=float), gamma, dx, boundary, eps_weno, p, bounded)
    return out if i is None else float(out[..., i])


# ----------------------------------------------------------------------------
# scheme and assembled operators


@dataclass(frozen=True)
class SchemeSpec:
    """Stencil choice: hyperbolic order in {1, 3, 4, 'cweno3'}, parabolic order in {2, 4}.

    ``limiter="bounds"`` keeps CWENO3 face values inside the range of the
    neighbouring cell averages (ignored for the linear stencils).
    """

    hyperbolic_order: HyperbolicOrder = 3
    parabolic_order: int = 4
    eps_weno: float = 1e-6
    weno_power: int = 2
    limiter: str | None = None

    def __post_init__(self) -> None:
        h = self.hyperbolic_order
        if isinstance(h, str):
            if h.lower() != "cweno3":
                raise ParameterError(f"unknown hyperbolic scheme {h!r}")
            object.__setattr__(self, "hyperbolic_order", "cweno3")
        elif int(h) not in (1, 3, 4):
            raise ParameterError(f"hyperbolic order must be 1, 3, 4 or 'cweno3', got {h!r}")
        if int(self.parabolic_order) not in (2, 4):
            raise ParameterError(f"parabolic order must be 2 or 4, got {self.parabolic_order!r}")
        if self.limiter not in (None, "bounds"):
            raise ParameterError(f"unknown limiter {self.limiter!r}; use None or 'bounds'")

    @property
    def is_cweno(self) -> bool:
        return self.hyperbolic_order == "cweno3"

    @classmethod
    def of_order(cls, order: int) -> "SchemeSpec":
        """Named combinations: 1 -> (1, 2), 3 -> (3, 4), 4 -> (4, 4)."""
        table = {1: (1, 2), 2: (1, 2), 3: (3, 4), 4: (4, 4)}
        if order not in table:
            raise ParameterError(f"no scheme of order {order}")
        h, q = table[order]
        return cls(h, q)


def _axis_matrix(stencil: Stencil, grid: Grid, axis: int, rule: BoundaryRule) -> sp.csr_matrix:
    n = grid.cells[axis]
    d1 = derivative_matrix(stencil, n, grid.spacings[axis], rule)
    if grid.dim == 1:
        return d1
    nx, ny = grid.cells
    if axis == 0:
        return sp.kron(sp.identity(ny, format="csr"), d1, format="csr")
    return sp.kron(d1, sp.identity(nx, format="csr"), format="csr")


@dataclass
class TransportOperator:
    """Linear-or-WENO discretisation of ``Phi(f) = sum_d Gamma_d d_{x_d} f``."""

    model: KineticModel
    grid: Grid
    scheme: SchemeSpec
    boundary: tuple[BoundaryRule, ...]
    matrix: sp.csr_matrix = field(init=False, repr=False)
    weno_rows: tuple[int, ...] = field(init=False)

    def __post_init__(self) -> None:
        if self.model.dim != self.grid.dim:
            raise ParameterError(f"model is {self.model.dim}D but grid is {self.grid.dim}D")
        if self.scheme.is_cweno and self.grid.dim != 2:
            raise ParameterError("CWENO3 transport is only available on 2D grids")
        rules = self.boundary
        if isinstance(rules, (str, BoundaryRule)):
            rules = (rules,) * self.grid.dim
        self.boundary = tuple(BoundaryRule.parse(r) for r in rules)
        if len(self.boundary) != self.grid.dim:
            raise ParameterError("one boundary rule per axis required")
        gam = self.model.velocities
        N = self.grid.n_cells
        blocks = []
        weno = []
        for l in range(self.model.n_velocities):
            hyper = l < self.model.n_hyperbolic
            block = sp.csr_matrix((N, N))
            if hyper and self.scheme.is_cweno:
                weno.append(l)
            else:
                for d in range(self.grid.dim):
                    g = float(gam[d, l])
                    if g == 0.0:
                        continue
                    if hyper:
                        st = stencil_for("upwind", int(self.scheme.hyperbolic_order), g)
                    else:
                        st = stencil_for("centered", self.scheme.parabolic_order, g)
                    block = block + g * _axis_matrix(st, self.grid, d, self.boundary[d])
            blocks.append(block)
        self.matrix = sp.block_diag(blocks, format="csr")
        self.weno_rows = tuple(weno)

    @property
    def n_velocities(self) -> int:
        return self.model.n_velocities

    def apply(self, f: np.ndarray) -> np.ndarray:
        """Evaluate ``Phi(f)`` for a kinetic field of shape ``(L, K, *grid.shape)``."""
        L = self.n_velocities
        K = f.shape[1]
        N = self.grid.n_cells
        if K == 1:
            out = (self.matrix @ f.reshape(L * N)).reshape(f.shape)
        else:
            flat = np.ascontiguousarray(f.reshape(L, K, N).swapaxes(1, 2)).reshape(L * N, K)
            out = (self.matrix @ flat).reshape(L, N, K).swapaxes(1, 2).reshape(f.shape)
        if self.weno_rows:
            gam = self.model.velocities
            for l in self.weno_rows:
                for d in range(self.grid.dim):
                    g = float(gam[d, l])
                    if g == 0.0:
                        continue
                    arr = f[l]
                    if d == 1:  # y is the second-to-last axis
                        arr = np.swapaxes(arr, -1, -2)
                    val = _cweno3_along_last(arr, g, self.grid.spacings[d], self.boundary[d],
                                             self.scheme.eps_weno, self.scheme.weno_power,
                                             self.scheme.limiter == "bounds")
                    if d == 1:
                        val = np.swapaxes(val, -1, -2)
                    out[l] += val
        return out


class SemiDiscreteOperator:
    """Right-hand side ``D(f) = -Phi(f) + (M(P f) - f) / eps`` of the semi-discrete kinetic system."""

    def __init__(
        self,
        model: KineticModel,
        grid: Grid,
        scheme: SchemeSpec | None = None,
        boundary: BoundaryRule | str | Sequence[BoundaryRule | str] = BoundaryRule.PERIODIC,
    ) -> None:
        if not model.epsilon > 0.0:
            raise ParameterError("epsilon must be positive: the scheme is explicit in the relaxation")
        self.model = model
        self.grid = grid
        self.scheme = scheme if scheme is not None else SchemeSpec()
        if isinstance(boundary, (str, BoundaryRule)):
            boundary = (boundary,) * grid.dim
        self.transport = TransportOperator(model, grid, self.scheme, tuple(boundary))
        self.inv_eps = 1.0 / model.epsilon

    @property
    def epsilon(self) -> float:
        return self.model.epsilon

    @property
    def boundary(self) -> tuple[BoundaryRule, ...]:
        return self.transport.boundary

    def transport_term(self, f: np.ndarray) -> np.ndarray:
        return self.transport.apply(f)

    def relaxation(self, f: np.ndarray) -> np.ndarray:
        """``(M(P f) - f)/eps`` with its velocity sum removed.

        The sum vanishes exactly in real arithmetic; subtracting the rounded
        residual keeps the relaxation conservative in floating point, so
        large projective extrapolations do not accumulate mass drift.
        """
        r = maxwellian(self.model, project(f)) - f
        r -= r.mean(axis=0, keepdims=True)
        return r * self.inv_eps

    def __call__(self, f: np.ndarray) -> np.ndarray:
        return self.relaxation(f) - self.transport.apply(f)

    def with_epsilon(self, epsilon: float) -> "SemiDiscreteOperator":
        return SemiDiscreteOperator(self.model.with_epsilon(epsilon), self.grid, self.scheme, self.boundary)


def semidiscrete_rhs(
    model: KineticModel,
    scheme: SchemeSpec,
    field: np.ndarray,
    grid: Grid,
    boundary: BoundaryRule | str | Sequence[BoundaryRule | str] = BoundaryRule.PERIODIC,
) -> np.ndarray:
    """One-shot evaluation of the semi-discrete right-hand side (builds the operator)."""
    if not model.epsilon > 0.0:
        raise ParameterError("epsilon must be positive: the scheme is explicit in the relaxation")
    return SemiDiscreteOperator(model, grid, scheme, boundary)(field)


def max_speed(model: KineticModel) -> float:
    return float(np.max(np.abs(model.velocities)))


__all__ += ["max_speed"]
