"""Numerical building blocks: smooth curves, RK4 solves, grid norms, symplectic maps."""

from .norms import GridNorms, grid_cr_norm, grid_norms, max_column_sum, sup_norm
from .ode import (
    DEFAULT_STEP,
    TimeGrid,
    cumulative_integral,
    integrate_jacobi,
    integrate_linear_system,
    integrate_riccati,
)
from .smooth import (
    MatrixCurve,
    SmoothFn,
    bump,
    cos_fn,
    hump,
    piecewise,
    polynomial,
    sigma_fn,
    sin_fn,
    smooth_step,
)
from .symplectic import J, SymplecticMap, compose, map_distance, symplectic_defect, symplectic_inverse

__all__ = [
    "DEFAULT_STEP", "GridNorms", "J", "MatrixCurve", "SmoothFn", "SymplecticMap", "TimeGrid",
    "bump", "compose", "cos_fn", "cumulative_integral", "grid_cr_norm", "grid_norms", "hump",
    "integrate_jacobi", "integrate_linear_system", "integrate_riccati", "map_distance",
    "max_column_sum", "piecewise", "polynomial", "sigma_fn", "sin_fn", "smooth_step",
    "sup_norm", "symplectic_defect", "symplectic_inverse",
]
