"""Perturbing linear Poincare maps of geodesic flows through small curvature changes."""

from . import cli, errors, highdim, jacobi, metric, numkit, rng, surface
from ._kernels import BACKEND
from .errors import FranksError

__version__ = "0.1.0"

__all__ = ["BACKEND", "FranksError", "cli", "errors", "highdim", "jacobi", "metric", "numkit",
           "rng", "surface"]
