"""Projective integration of BGK-type kinetic relaxation models.

Discrete-velocity kinetic models relax at rate ``1/epsilon`` towards a
Maxwellian whose moments reproduce a (possibly degenerate) convection-diffusion
system.  The stiff relaxation is handled by projective integrators: a few
small damping steps followed by a large extrapolation, with a cost that does
not grow as ``epsilon -> 0``.

Submodules: :mod:`model`, :mod:`core`, :mod:`transport`, :mod:`integrate`,
:mod:`spectral`, :mod:`problems`, :mod:`harness`, :mod:`cli` and the
estimator wrapper :mod:`estimator`.
"""

from .core import BoundaryRule, Grid, cell_averages, init_kinetic, project, total_mass
from .estimator import ProjectiveSolver
from .harness import simulate, spatial_convergence, temporal_convergence
from .integrate import ProjectiveParams, get_tableau, integrate_projective, pfe_step, prk_step
from .model import KineticModel, ParameterError, maxwellian
from .problems import CATALOG_NAMES, catalog
from .transport import SchemeSpec, SemiDiscreteOperator

__version__ = "0.1.0"

__all__ = [
    "BoundaryRule",
    "CATALOG_NAMES",
    "Grid",
    "KineticModel",
    "ParameterError",
    "ProjectiveParams",
    "ProjectiveSolver",
    "SchemeSpec",
    "SemiDiscreteOperator",
    "catalog",
    "cell_averages",
    "get_tableau",
    "init_kinetic",
    "integrate_projective",
    "maxwellian",
    "pfe_step",
    "prk_step",
    "project",
    "simulate",
    "spatial_convergence",
    "temporal_convergence",
    "total_mass",
]
