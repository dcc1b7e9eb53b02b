"""Jacobi fields along a unit-speed geodesic.

Curvature is given either as a scalar SmoothFn k(t) (surfaces) or as a
symmetric MatrixCurve R(t). The linear Poincare map between t_start and
t_end is built from the fundamental solutions A (A=I, A'=0) and B (B=0,
B'=I) started at t_start.
"""

from dataclasses import dataclass

import numpy as np

from .errors import BlowUp, DimensionMismatch, SingularSolution
from .numkit.ode import (
    DEFAULT_STEP,
    CumulativeIntegral,
    MIN_STEPS,
    TimeGrid,
    cumulative_integral,
    integrate_jacobi,
    integrate_riccati,
)
from .numkit.smooth import MatrixCurve, SmoothFn
from .numkit.symplectic import SymplecticMap

SINGULAR_THRESHOLD = 1e-6
BLOWUP_THRESHOLD = 1e6


def as_matrix_curve(profile):
    """Promote a scalar curvature to a 1x1 MatrixCurve."""
    if isinstance(profile, MatrixCurve):
        return profile
    if isinstance(profile, SmoothFn):
        return MatrixCurve.from_scalar(profile)
    M = np.asarray(profile, dtype=float)
    return MatrixCurve.constant(M if M.ndim == 2 else M.reshape(1, 1))


def check_symmetric(R, t0=0.0, t1=1.0, points=257, tol=1e-12):
    R = as_matrix_curve(R)
    t = np.linspace(t0, t1, points)
    d = R.symmetry_defect(t)
    if d > tol:
        raise DimensionMismatch(f"curvature matrix is not symmetric (defect {d:.3g})")
    return R


def solve_jacobi(profile, y0, y0p, t0=0.0, t1=1.0, step=DEFAULT_STEP, grid=None):
    """Dense solution of y'' + k y = 0 (or Y'' + R Y = 0) from data at t0."""
    R = as_matrix_curve(profile)
    return integrate_jacobi(R, y0, y0p, t0, t1, step, grid=grid)


@dataclass
class FundamentalSolution:
    """A and B started at t0, stored as one n x 2n solve."""

    solution: object
    n: int
    t0: float

    def blocks(self, t):
        j = self.solution.jet(t, 1)
        n = self.n
        return j[0][..., :n], j[0][..., n:], j[1][..., :n], j[1][..., n:]

    def A(self, t):
        return self.solution(t)[..., : self.n]

    def B(self, t):
        return self.solution(t)[..., self.n:]

    @property
    def a(self):
        return self.solution.component(0, 0)

    @property
    def b(self):
        return self.solution.component(0, 1)

    @property
    def grid(self):
        return self.solution.grid

    def A_solution(self):
        return _ColumnView(self.solution, slice(0, self.n))

    def wronskian_defect(self, t=None):
        """max |A^T B' - A'^T B - I| and the A^T A' symmetry defect over t."""
        t = self.grid.nodes if t is None else np.asarray(t, dtype=float)
        A, B, Ap, Bp = self.blocks(t)
        AT = np.swapaxes(A, -1, -2)
        ApT = np.swapaxes(Ap, -1, -2)
        w = AT @ Bp - ApT @ B - np.eye(self.n)
        s = AT @ Ap
        return float(np.max(np.abs(w))), float(np.max(np.abs(s - np.swapaxes(s, -1, -2))))

    def dp(self, t):
        A, B, Ap, Bp = self.blocks(t)
        return SymplecticMap.from_blocks(A, B, Ap, Bp)


class _ColumnView:
    def __init__(self, sol, cols):
        self.sol = sol
        self.cols = cols
        self.grid = sol.grid

    def jet(self, t, order=1):
        return self.sol.jet(t, order)[..., self.cols]

    def __call__(self, t):
        return self.jet(t, 0)[0]


def fundamental_solution(profile, t0=0.0, t1=1.0, step=DEFAULT_STEP, grid=None):
    R = as_matrix_curve(profile)
    n = R.n
    Y0 = np.hstack([np.eye(n), np.zeros((n, n))])
    P0 = np.hstack([np.zeros((n, n)), np.eye(n)])
    sol = integrate_jacobi(R, Y0, P0, t0, t1, step, grid=grid)
    return FundamentalSolution(sol, n, float(t0))


def dp_from_curvature(profile, t_start=0.0, t_end=1.0, step=DEFAULT_STEP):
    """Linear Poincare map from t_start to t_end in shifted-time blocks."""
    if not t_end > t_start:
        raise ValueError("t_end must exceed t_start")
    fs = fundamental_solution(profile, t_start, t_end, step)
    Y, P = fs.solution.endpoint()
    n = fs.n
    return SymplecticMap.from_blocks(Y[:, :n], Y[:, n:], P[:, :n], P[:, n:])


def wronskian(a, b, t):
    """a b' - a' b for scalar SmoothFn-like objects."""
    ja, jb = a.jet(t, 1), b.jet(t, 1)
    return ja[0] * jb[1] - ja[1] * jb[0]


def reduction_of_order(a, t):
    """B(t) = A(t) int_0^t (A^T A)^{-1}, from a dense solution A alone.

    ``a`` is a scalar SmoothFn solution (returns scalars), a dense matrix
    solution with a ``grid``, or a FundamentalSolution (its A block is used).
    Raises SingularSolution if A comes within 1e-6 of singular on [0, t].
    """
    if isinstance(a, FundamentalSolution):
        a = a.A_solution()
    t = np.asarray(t, dtype=float)
    grid = a.grid if hasattr(a, "grid") else TimeGrid(a.domain[0], a.domain[1], DEFAULT_STEP,
                                                      a.breakpoints)
    scalar = isinstance(a, SmoothFn)

    def A_of(s):
        v = np.asarray(a(s), dtype=float)
        return v[..., None, None] if scalar else v

    tmax = float(np.max(t))
    A_nodes = A_of(grid.nodes)
    A_mid = A_of(grid.midpoints)
    # interleave nodes and midpoints so a sign change of det A between
    # samples is caught even when no sample lands near the zero
    merged = np.empty((A_nodes.shape[0] + A_mid.shape[0],) + A_nodes.shape[1:])
    merged[0::2] = A_nodes
    merged[1::2] = A_mid
    times = np.empty(merged.shape[0])
    times[0::2] = grid.nodes
    times[1::2] = grid.midpoints
    merged = merged[times <= tmax + 1e-15]
    sv = np.linalg.svd(merged, compute_uv=False)[:, -1]
    det = np.linalg.det(merged)
    if sv.size and (np.min(sv) < SINGULAR_THRESHOLD or np.any(det[1:] * det[:-1] <= 0.0)):
        raise SingularSolution(f"A is singular or within {SINGULAR_THRESHOLD} of singular on [0, {tmax:g}]")

    def gram_inv(A):
        return np.linalg.inv(np.swapaxes(A, -1, -2) @ A)

    F = CumulativeIntegral(grid, gram_inv(A_nodes), gram_inv(A_mid))
    Bt = A_of(t) @ F(t)
    return Bt[..., 0, 0] if scalar else Bt


def riccati_transport(profile, U0, interval=(0.0, 1.0), step=DEFAULT_STEP):
    """Solve U' + U^2 + R = 0 on interval; BlowUp if any entry passes 1e6."""
    R = as_matrix_curve(profile)
    U0 = np.asarray(U0, dtype=float).reshape(R.n, R.n)
    sol = integrate_riccati(R, U0, interval[0], interval[1], step)
    vals = sol.values
    bad = ~np.isfinite(vals) | (np.abs(np.nan_to_num(vals, nan=np.inf)) > BLOWUP_THRESHOLD)
    if np.any(bad):
        k = int(np.argmax(np.any(bad.reshape(bad.shape[0], -1), axis=1)))
        raise BlowUp(f"Riccati solution exceeds {BLOWUP_THRESHOLD:g} near t = {sol.grid.nodes[k]:.6g}")
    return sol


def variation_of_parameters(profile, g, t, step=DEFAULT_STEP):
    """Solve y'' + k y = g with y(0) = y'(0) = 0 via the fundamental pair.

    y = -a int b g + b int a g and y' = -a' int b g + b' int a g.
    Returns (y(t), y'(t)).
    """
    R = as_matrix_curve(profile)
    if R.n != 1:
        raise DimensionMismatch("variation of parameters is implemented for the scalar case")
    g = SmoothFn.constant(float(g)) if not isinstance(g, SmoothFn) else g
    t = np.asarray(t, dtype=float)
    tmax = max(float(np.max(t)), 1e-12)
    grid = TimeGrid(0.0, max(1.0, tmax), step, R.breakpoints + g.breakpoints, MIN_STEPS)
    fs = fundamental_solution(R, 0.0, grid.t1, step, grid=grid)

    def ag(s):
        return fs.solution(s)[..., 0, 0] * g(s)

    def bg(s):
        return fs.solution(s)[..., 0, 1] * g(s)

    Iag = cumulative_integral(ag, grid)
    Ibg = cumulative_integral(bg, grid)
    j = fs.solution.jet(t, 1)
    a, b = j[0][..., 0, 0], j[0][..., 0, 1]
    ap, bp = j[1][..., 0, 0], j[1][..., 0, 1]
    y = -a * Ibg(t) + b * Iag(t)
    yp = -ap * Ibg(t) + bp * Iag(t)
    return y, yp
