"""Fixed-step RK4 solves with dense output.

Grids are split at the breakpoints of the coefficient curve so that every
support edge and every jump sits on a node. Between nodes, values are
interpolated by cubic Hermite from stored values and slopes; higher
derivatives come from the ODE itself.
"""

from math import ceil, comb

import numpy as np

from .. import _kernels
from ..errors import NonFiniteState
from .smooth import MatrixCurve, SmoothFn

DEFAULT_STEP = 1.0 / 4096
MIN_STEPS = 64


class TimeGrid:
    """Nodes of a fixed-step grid on [t0, t1], refined per segment.

    Each segment between consecutive breakpoints gets
    ``max(min_steps, ceil(L / step))`` equal steps.
    """

    def __init__(self, t0, t1, step=DEFAULT_STEP, breakpoints=(), min_steps=MIN_STEPS):
        t0, t1 = float(t0), float(t1)
        if not t1 > t0:
            raise ValueError(f"empty interval [{t0}, {t1}]")
        cuts = [t0] + sorted(b for b in set(breakpoints) if t0 + 1e-12 < b < t1 - 1e-12) + [t1]
        pieces = []
        for lo, hi in zip(cuts, cuts[1:]):
            n = max(int(min_steps), int(ceil((hi - lo) / step - 1e-9)))
            pieces.append(np.linspace(lo, hi, n + 1)[:-1])
        pieces.append(np.array([t1]))
        self.nodes = np.concatenate(pieces)
        self.h = np.diff(self.nodes)
        self.t0, self.t1 = t0, t1
        self.step = step
        self.min_steps = min_steps

    def __len__(self):
        return self.nodes.size

    @property
    def midpoints(self):
        return self.nodes[:-1] + 0.5 * self.h

    def locate(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.nodes, t, side="right") - 1
        return np.clip(idx, 0, self.h.size - 1)


def grid_for(curve, t0, t1, step=DEFAULT_STEP, min_steps=MIN_STEPS):
    return TimeGrid(t0, t1, step, curve.breakpoints, min_steps)


def sample_steps(curve, grid):
    """Per-step (start, mid, end) samples of a curve.

    End samples are taken one ulp inside the step, which picks up the left
    limit of a curve that jumps at the next node.
    """
    starts = grid.nodes[:-1]
    ends = np.nextafter(grid.nodes[1:], -np.inf)
    return curve(starts), curve(grid.midpoints), curve(ends)


def _as_matrix_samples(vals, n):
    vals = np.asarray(vals, dtype=float)
    return vals.reshape(vals.shape[0], n, n)


def _hermite(s, h, y0, m0, y1, m1):
    s2 = s * s
    s3 = s2 * s
    h00 = 2 * s3 - 3 * s2 + 1
    h10 = s3 - 2 * s2 + s
    h01 = -2 * s3 + 3 * s2
    h11 = s3 - s2
    return h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1


def _expand(a, ndim):
    return a.reshape(a.shape + (1,) * (ndim - a.ndim))


def _check_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise NonFiniteState("solution overflowed or produced NaN")


class _DenseBase:
    """Shared Hermite interpolation over stored nodes."""

    def __init__(self, grid, values, start_slopes, end_slopes):
        self.grid = grid
        self.values = values
        self._ms = start_slopes
        self._me = end_slopes

    @property
    def domain(self):
        return (self.grid.t0, self.grid.t1)

    def _interp(self, t, values, ms, me):
        t = np.asarray(t, dtype=float)
        flat = t.reshape(-1)
        k = self.grid.locate(flat)
        h = self.grid.h[k]
        s = (flat - self.grid.nodes[k]) / h
        nd = values.ndim
        out = _hermite(_expand(s, nd), _expand(h, nd), values[k], ms[k], values[k + 1], me[k])
        return out.reshape(t.shape + values.shape[1:])

    def at_nodes(self):
        return self.grid.nodes, self.values

    def final(self):
        return self.values[-1]


class JacobiSolution(_DenseBase):
    """Dense solution of Y'' + R Y = 0 with state (Y, Y')."""

    def __init__(self, R, grid, Y, P, Rs, Re):
        super().__init__(grid, Y, P[:-1], P[1:])
        self.R = R
        self.P = P
        self._ps = -Rs @ Y[:-1]
        self._pe = -Re @ Y[1:]
        self.n, self.p = Y.shape[1], Y.shape[2]

    def jet(self, t, order=2):
        t = np.asarray(t, dtype=float)
        out = [self._interp(t, self.values, self._ms, self._me)]
        if order >= 1:
            out.append(self._interp(t, self.P, self._ps, self._pe))
        if order >= 2:
            Rj = self.R.jet(t, order - 2)
            for m in range(order - 1):
                acc = np.zeros_like(out[0])
                for j in range(m + 1):
                    acc -= comb(m, j) * (Rj[j] @ out[m - j])
                out.append(acc)
        return np.stack(out)

    def __call__(self, t):
        return self.jet(t, 0)[0]

    def derivative_at(self, t):
        return self.jet(t, 1)[1]

    def endpoint(self):
        return self.values[-1], self.P[-1]

    def _mo(self):
        return None if self.R.max_order is None else self.R.max_order + 2

    def as_curve(self):
        """MatrixCurve view (requires a square state)."""
        if self.n != self.p:
            raise ValueError("state is not square")
        return MatrixCurve(lambda t, k: self.jet(t, k), self.domain, self._mo(),
                           "ode-solution", self.R.breakpoints, n=self.n)

    def component(self, i=0, j=0):
        return SmoothFn(lambda t, k: self.jet(t, k)[..., i, j], self.domain, self._mo(),
                        "ode-solution", self.R.breakpoints)


class RiccatiSolution(_DenseBase):
    """Dense solution of U' + U^2 + R = 0."""

    def __init__(self, R, grid, U, Rs, Re):
        super().__init__(grid, U, -U[:-1] @ U[:-1] - Rs, -U[1:] @ U[1:] - Re)
        self.R = R
        self.n = U.shape[1]

    def jet(self, t, order=1):
        t = np.asarray(t, dtype=float)
        out = [self._interp(t, self.values, self._ms, self._me)]
        if order >= 1:
            Rj = self.R.jet(t, order - 1)
            for m in range(order):
                acc = -Rj[m]
                for j in range(m + 1):
                    acc = acc - comb(m, j) * (out[j] @ out[m - j])
                out.append(acc)
        return np.stack(out)

    def __call__(self, t):
        return self.jet(t, 0)[0]

    def as_curve(self):
        mo = None if self.R.max_order is None else self.R.max_order + 1
        return MatrixCurve(lambda t, k: self.jet(t, k), self.domain, mo, "ode-solution",
                           self.R.breakpoints, n=self.n, symmetric=True)


class LinearSolution(_DenseBase):
    """Dense solution of y' = M(t) y; vector initial data gives vector output."""

    def __init__(self, M, grid, Y, Ms, Me, vector=False):
        super().__init__(grid, Y, Ms @ Y[:-1], Me @ Y[1:])
        self.M = M
        self.vector = vector

    def jet(self, t, order=1):
        t = np.asarray(t, dtype=float)
        out = [self._interp(t, self.values, self._ms, self._me)]
        if order >= 1:
            Mj = self.M.jet(t, order - 1)
            for m in range(order):
                acc = np.zeros_like(out[0])
                for j in range(m + 1):
                    acc += comb(m, j) * (Mj[j] @ out[m - j])
                out.append(acc)
        out = np.stack(out)
        return out[..., 0] if self.vector else out

    def __call__(self, t):
        return self.jet(t, 0)[0]


def integrate_jacobi(R, Y0, P0, t0=0.0, t1=1.0, step=DEFAULT_STEP, min_steps=MIN_STEPS,
                     grid=None):
    """Solve Y'' + R(t) Y = 0 from (Y0, P0) at t0."""
    n = R.n
    Y0 = np.asarray(Y0, dtype=float).reshape(n, -1)
    P0 = np.asarray(P0, dtype=float).reshape(n, -1)
    grid = grid or grid_for(R, t0, t1, step, min_steps)
    Rs, Rm, Re = (_as_matrix_samples(v, n) for v in sample_steps(R, grid))
    Y, P = _kernels.rk4_jacobi(grid.h, Rs, Rm, Re, Y0, P0)
    _check_finite(Y, P)
    return JacobiSolution(R, grid, Y, P, Rs, Re)


def integrate_riccati(R, U0, t0=0.0, t1=1.0, step=DEFAULT_STEP, min_steps=MIN_STEPS, grid=None):
    """Solve U' = -U^2 - R(t) from U0 at t0 (no blow-up guard here)."""
    n = R.n
    grid = grid or grid_for(R, t0, t1, step, min_steps)
    Rs, Rm, Re = (_as_matrix_samples(v, n) for v in sample_steps(R, grid))
    with np.errstate(over="ignore", invalid="ignore"):
        U = _kernels.rk4_riccati(grid.h, Rs, Rm, Re, np.asarray(U0, dtype=float).reshape(n, n))
    return RiccatiSolution(R, grid, U, Rs, Re)


def integrate_linear_system(rhs, y0, interval=(0.0, 1.0), step=DEFAULT_STEP,
                            min_steps=MIN_STEPS):
    """Solve y' = M(t) y with M given as a MatrixCurve; y0 a vector or matrix."""
    m = rhs.n
    y0 = np.asarray(y0, dtype=float)
    vec = y0.ndim == 1
    Y0 = y0.reshape(m, -1)
    grid = grid_for(rhs, interval[0], interval[1], step, min_steps)
    Ms, Mm, Me = (_as_matrix_samples(v, m) for v in sample_steps(rhs, grid))
    with np.errstate(over="ignore", invalid="ignore"):
        Y = _kernels.rk4_linear_batch(grid.h, Ms[None], Mm[None], Me[None], Y0[None])[0]
    _check_finite(Y)
    return LinearSolution(rhs, grid, Y, Ms, Me, vector=vec)


class CumulativeIntegral(_DenseBase):
    """F(t) = int_{t0}^t f, by composite Simpson on a grid, Hermite between nodes."""

    def __init__(self, grid, f_nodes, f_mid):
        h = grid.h.reshape((-1,) + (1,) * (f_nodes.ndim - 1))
        inc = h / 6.0 * (f_nodes[:-1] + 4.0 * f_mid + f_nodes[1:])
        F = np.concatenate([np.zeros((1,) + f_nodes.shape[1:]), np.cumsum(inc, axis=0)])
        super().__init__(grid, F, f_nodes[:-1], f_nodes[1:])

    def __call__(self, t):
        return self._interp(t, self.values, self._ms, self._me)


def cumulative_integral(f, grid):
    """Integrate a vectorised callable over a TimeGrid."""
    starts = grid.nodes
    return CumulativeIntegral(grid, np.asarray(f(starts), float), np.asarray(f(grid.midpoints), float))
