"""Grid-based C^r norms."""

from dataclasses import dataclass

import numpy as np

DEFAULT_POINTS = 4097


@dataclass(frozen=True)
class GridNorms:
    c0: float
    c1: float
    c2: float
    grid_points: int

    def get(self, r):
        return (self.c0, self.c1, self.c2)[r]


def _grid(f, grid_points, domain):
    lo, hi = domain if domain is not None else f.domain
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise ValueError("a finite domain is needed for a grid norm")
    return np.linspace(lo, hi, int(grid_points))


def grid_norms(f, grid_points=DEFAULT_POINTS, domain=None, order=2):
    """Cumulative sup-norms of f, f', f'' on a uniform grid.

    The C^r norm is the max over derivative orders 0..r of the grid sup of
    the absolute value (entrywise max for matrix curves).
    """
    if grid_points < 2:
        raise ValueError("grid_points must be >= 2")
    t = _grid(f, grid_points, domain)
    j = f.jet(t, order)
    sups = [float(np.max(np.abs(j[m]))) for m in range(order + 1)]
    sups += [sups[-1]] * (3 - len(sups))
    cum = np.maximum.accumulate(sups)
    return GridNorms(float(cum[0]), float(cum[1]), float(cum[2]), int(grid_points))


def grid_cr_norm(f, r, grid_points=DEFAULT_POINTS, domain=None):
    if r not in (0, 1, 2):
        raise ValueError("r must be 0, 1 or 2")
    return grid_norms(f, grid_points, domain, order=r).get(r)


def sup_norm(f, grid_points=DEFAULT_POINTS, domain=None):
    return grid_cr_norm(f, 0, grid_points, domain)


def max_column_sum(X):
    """Operator 1-norm, the max over columns of the absolute column sums."""
    return float(np.linalg.norm(np.atleast_2d(X), 1))
