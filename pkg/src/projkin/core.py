"""Uniform cell grids, ghost-cell handling and kinetic initialisation."""

from __future__ import annotations

import enum
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import KineticModel, ParameterError, maxwellian, project

__all__ = [
    "BoundaryRule",
    "Grid",
    "N_GHOST",
    "InputError",
    "fill_ghosts",
    "ghost_index",
    "cell_averages",
    "init_kinetic",
    "as_state",
    "write_macro_csv",
]

N_GHOST = 3

# 3-point Gauss-Legendre nodes/weights on [-1/2, 1/2] (weights sum to one)
_GAUSS_NODES = np.array([-math.sqrt(15.0) / 10.0, 0.0, math.sqrt(15.0) / 10.0])
_GAUSS_WEIGHTS = np.array([5.0, 8.0, 5.0]) / 18.0


class InputError(ValueError):
    """Non-finite or malformed input data."""


class BoundaryRule(str, enum.Enum):
    PERIODIC = "periodic"
    ZERO_GRADIENT = "zero_gradient"

    @classmethod
    def parse(cls, value: "BoundaryRule | str") -> "BoundaryRule":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        aliases = {"zerogradient": "zero_gradient", "neumann": "zero_gradient", "outflow": "zero_gradient"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError as exc:
            raise ParameterError(f"unknown boundary rule {value!r}") from exc


@dataclass(frozen=True)
class Grid:
    """Uniform Cartesian cell grid in one or two dimensions.

    ``extents`` holds one ``(lo, hi)`` pair per axis in the order ``(x, y)``
    and ``cells`` the matching cell counts.  Fields on a 2D grid are stored
    with shape ``(..., ny, nx)``.
    """

    extents: tuple[tuple[float, float], ...]
    cells: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.extents) != len(self.cells) or len(self.cells) not in (1, 2):
            raise ParameterError("grid must be 1D or 2D with one extent per axis")
        for (lo, hi), n in zip(self.extents, self.cells):
            if not hi > lo:
                raise ParameterError(f"degenerate extent [{lo}, {hi}]")
            if int(n) < 2 * N_GHOST + 1:
                raise ParameterError(f"need at least {2 * N_GHOST + 1} cells per axis, got {n}")
        if self.dim == 2:
            dx, dy = self.spacings
            if not math.isclose(dx, dy, rel_tol=1e-12):
                raise ParameterError(f"2D grids need dx == dy, got {dx} and {dy}")

    @classmethod
    def uniform_1d(cls, lo: float, hi: float, n: int) -> "Grid":
        return cls(((float(lo), float(hi)),), (int(n),))

    @classmethod
    def uniform_2d(cls, x_extent: tuple[float, float], y_extent: tuple[float, float],
                   nx: int, ny: int | None = None) -> "Grid":
        if ny is None:
            ny = int(round(nx * (y_extent[1] - y_extent[0]) / (x_extent[1] - x_extent[0])))
        return cls(((float(x_extent[0]), float(x_extent[1])),
                    (float(y_extent[0]), float(y_extent[1]))), (int(nx), int(ny)))

    @property
    def dim(self) -> int:
        return len(self.cells)

    @property
    def spacings(self) -> tuple[float, ...]:
        return tuple((hi - lo) / n for (lo, hi), n in zip(self.extents, self.cells))

    @property
    def dx(self) -> float:
        return self.spacings[0]

    @property
    def shape(self) -> tuple[int, ...]:
        """Array shape of one scalar field (reversed axis order: ``(ny, nx)``)."""
        return tuple(reversed(self.cells))

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.cells))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacings))

    def centers(self, axis: int = 0) -> np.ndarray:
        (lo, hi), n = self.extents[axis], self.cells[axis]
        h = (hi - lo) / n
        return lo + (np.arange(n) + 0.5) * h

    def mesh(self) -> tuple[np.ndarray, ...]:
        """Cell-centre coordinates broadcast to :attr:`shape`."""
        if self.dim == 1:
            return (self.centers(0),)
        X, Y = np.meshgrid(self.centers(0), self.centers(1), indexing="xy")
        return X, Y


def _rules(rule: BoundaryRule | str | Sequence[BoundaryRule | str], dim: int) -> tuple[BoundaryRule, ...]:
    if isinstance(rule, (str, BoundaryRule)):
        return (BoundaryRule.parse(rule),) * dim
    rules = tuple(BoundaryRule.parse(r) for r in rule)
    if len(rules) != dim:
        raise ParameterError(f"need {dim} boundary rules, got {len(rules)}")
    return rules


def ghost_index(n: int, rule: BoundaryRule | str, n_ghost: int = N_GHOST) -> np.ndarray:
    """Source interior index for each position of a ghost-padded axis of length ``n``."""
    rule = BoundaryRule.parse(rule)
    j = np.arange(-n_ghost, n + n_ghost)
    if rule is BoundaryRule.PERIODIC:
        return np.mod(j, n)
    return np.clip(j, 0, n - 1)


def fill_ghosts(
    field: np.ndarray,
    rule: BoundaryRule | str | Sequence[BoundaryRule | str],
    dim: int = 1,
    n_ghost: int = N_GHOST,
) -> np.ndarray:
    """Return a copy of ``field`` padded with ``n_ghost`` layers on the last ``dim`` axes.

    Periodic rules wrap indices; zero-gradient rules copy the nearest interior
    cell.  The input is the interior only, so applying the fill to the
    interior of a padded array reproduces the padded array exactly.
    """
    field = np.asarray(field)
    rules = _rules(rule, dim)
    out = field
    for k, r in enumerate(rules):
        axis = field.ndim - 1 - k  # x is the last axis, y the one before
        idx = ghost_index(field.shape[axis], r, n_ghost)
        out = np.take(out, idx, axis=axis)
    return out


def as_state(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Coerce scalar-field output to the ``(K, *grid.shape)`` state layout."""
    values = np.asarray(values, dtype=float)
    if values.shape == grid.shape:
        return values[np.newaxis]
    if values.shape[1:] == grid.shape:
        return values
    raise InputError(f"initial data has shape {values.shape}, expected {grid.shape} or (K, *{grid.shape})")


def cell_averages(u0: Callable[..., np.ndarray], grid: Grid, *, discontinuous: bool = False) -> np.ndarray:
    """Cell averages of ``u0`` by tensor 3-point Gauss quadrature (midpoint if discontinuous)."""
    h = grid.spacings
    if discontinuous:
        return as_state(u0(*grid.mesh()), grid)
    total = None
    if grid.dim == 1:
        x = grid.centers(0)
        for node, w in zip(_GAUSS_NODES, _GAUSS_WEIGHTS):
            term = w * as_state(u0(x + node * h[0]), grid)
            total = term if total is None else total + term
    else:
        X, Y = grid.mesh()
        for nx_, wx in zip(_GAUSS_NODES, _GAUSS_WEIGHTS):
            for ny_, wy in zip(_GAUSS_NODES, _GAUSS_WEIGHTS):
                term = wx * wy * as_state(u0(X + nx_ * h[0], Y + ny_ * h[1]), grid)
                total = term if total is None else total + term
    assert total is not None
    return total


def init_kinetic(
    model: KineticModel,
    grid: Grid,
    u0: Callable[..., np.ndarray] | np.ndarray,
    *,
    discontinuous: bool = False,
) -> np.ndarray:
    """Well-prepared kinetic data ``f_l = M_l(eps, u0)`` on every cell.

    ``u0`` is either a callable of the cell coordinates (averaged over each
    cell) or an array of cell values.
    """
    if model.dim != grid.dim:
        raise ParameterError(f"model is {model.dim}D but grid is {grid.dim}D")
    if callable(u0):
        u = cell_averages(u0, grid, discontinuous=discontinuous)
    else:
        u = as_state(u0, grid)
    if u.shape[0] != model.n_components:
        raise InputError(f"initial data has {u.shape[0]} components, model expects {model.n_components}")
    if not np.all(np.isfinite(u)):
        raise InputError("initial data contains NaN or infinite values")
    return np.ascontiguousarray(maxwellian(model, u))


def total_mass(u: np.ndarray, grid: Grid) -> np.ndarray:
    """Per-component ``sum_i u_i |C_i|``."""
    return u.reshape(u.shape[0], -1).sum(axis=1) * grid.cell_volume


def write_macro_csv(path: str | Path, grid: Grid, u: np.ndarray) -> Path:
    """Write a macroscopic snapshot as ``x[,y],u1..uK`` with ``%.17g`` numbers."""
    path = Path(path)
    u = as_state(u, grid)
    K = u.shape[0]
    cols = list(grid.mesh())
    names = ["x", "y"][: grid.dim] + [f"u{k + 1}" for k in range(K)]
    data = np.column_stack([c.ravel() for c in cols] + [u[k].ravel() for k in range(K)])
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, data, delimiter=",", header=",".join(names), comments="", fmt="%.17g")
    return path


__all__ += ["total_mass", "project"]
