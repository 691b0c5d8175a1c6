"""scikit-learn style wrapper around a single projective kinetic run.

``fit`` integrates a catalog problem to its final time; ``predict`` samples
the resulting cell averages at arbitrary points.  Hyper-parameters are plain
constructor arguments, so ``get_params``/``set_params``/``clone`` work as for
any estimator.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .harness import _exact_averages, error_norms, simulate
from .model import ParameterError
from .problems import MissingExactSolution, Problem, catalog

__all__ = ["ProjectiveSolver"]


class ProjectiveSolver(BaseEstimator):
    """Projective integration of a kinetic relaxation model as an estimator.

    Parameters
    ----------
    problem : str
        Catalog name (see :data:`projkin.problems.CATALOG_NAMES`).
    cells : int or tuple, optional
        Grid size; defaults to the catalog value.
    epsilon : float, optional
        Relaxation time; defaults to the catalog value.
    cfl_C : float, optional
        Parabolic CFL constant, ``Delta_t = cfl_C dx^2``.
    K : int
        Number of damping steps before each extrapolation.
    tableau : str, optional
        Outer Runge--Kutta tableau (``euler``, ``rk2``, ``rk3_ssp``, ``rk4``).
    scheme : int or str, optional
        Scheme order (1, 3, 4) or ``"cweno3"``; defaults to the catalog scheme.
    t_end : float, optional
        Final time; defaults to the catalog horizon.

    Attributes
    ----------
    problem_ : Problem
    grid_ : Grid
    u_ : ndarray of shape ``(n_components, *grid.shape)``
    f_ : ndarray, final kinetic field
    params_ : ProjectiveParams
    """

    def __init__(self, problem="linear_diffusion", cells=None, epsilon=None, cfl_C=None, K=2,
                 tableau=None, scheme=None, t_end=None):
        self.problem = problem
        self.cells = cells
        self.epsilon = epsilon
        self.cfl_C = cfl_C
        self.K = K
        self.tableau = tableau
        self.scheme = scheme
        self.t_end = t_end

    def _resolve(self) -> Problem:
        return self.problem if isinstance(self.problem, Problem) else catalog(self.problem)

    def fit(self, X=None, y=None):
        """Run the integration.  ``X`` and ``y`` are ignored."""
        prob = self._resolve()
        res = simulate(prob, self.cells, scheme=self.scheme, epsilon=self.epsilon, K=self.K,
                       tableau=self.tableau, cfl_C=self.cfl_C, t_end=self.t_end)
        self.problem_ = prob
        self.grid_ = res.grid
        self.u_ = res.u
        self.f_ = res.f
        self.params_ = res.params
        self.t_ = prob.t_end if self.t_end is None else float(self.t_end)
        return self

    def predict(self, X):
        """Cell-average values at the points ``X`` (shape ``(n, dim)``, or ``(n,)`` in 1D).

        Returns an array of shape ``(n, n_components)``.
        """
        check_is_fitted(self, "u_")
        grid = self.grid_
        pts = np.asarray(X, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.shape[1] != grid.dim:
            raise ParameterError(f"expected points with {grid.dim} coordinate(s), got {pts.shape[1]}")
        idx = []
        for d in range(grid.dim):
            lo, hi = grid.extents[d]
            n = grid.cells[d]
            j = np.floor((pts[:, d] - lo) / (hi - lo) * n).astype(int)
            idx.append(np.clip(j, 0, n - 1))
        if grid.dim == 1:
            return self.u_[:, idx[0]].T
        # arrays are stored as (ny, nx)
        return self.u_[:, idx[1], idx[0]].T

    def score(self, X=None, y=None) -> float:
        """Negative L1 distance to the exact cell averages (higher is better)."""
        check_is_fitted(self, "u_")
        if self.problem_.exact is None:
            raise MissingExactSolution(f"problem {self.problem_.name!r} has no exact solution")
        exact = _exact_averages(self.problem_, self.grid_, self.t_)
        return -error_norms(self.u_ - exact, self.grid_)[0]
