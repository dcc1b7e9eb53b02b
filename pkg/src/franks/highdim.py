"""Perturbing the Poincare map along a geodesic in dimension n + 1 >= 3.

The Riccati field U = A' A^{-1} (A(t0) = I) is shifted by a symmetric
matrix bump psi; the curvature that makes U + psi a Riccati solution is
R + dR with dR = -psi' - U psi - psi U - psi^2, so symmetry of R is kept.
Three bump families move the A', A and B blocks of DP; a fourth, built
from two opposite bumps a distance d apart, uses the spread of the
eigenvalues of R to move the antisymmetric part of A. Together they give
2n^2 + n directions, enough to fill a ball around DP in Sp(n).
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DegenerateFit, NoDistinctEigenvalues, NonConvergence, OutOfBall
from .jacobi import as_matrix_curve, dp_from_curvature, riccati_transport
from .numkit.norms import max_column_sum
from .numkit.ode import DEFAULT_STEP, TimeGrid, sample_steps
from .numkit.smooth import MatrixCurve, SmoothFn, hump, piecewise, smooth_step
from .numkit.symplectic import SymplecticMap, symplectic_defect
from .surface import RealizationResult

HD_FAMILIES = ("H1", "H2", "H3")
SCHEMES = ("I", "II", "III", "IV")
SCHEME_FAMILY = {"I": "H1", "II": "H2", "III": "H3", "IV": "H3"}


# --------------------------------------------------------------------------
# bump families on (0, width)
# --------------------------------------------------------------------------

def family_width(family, delta):
    return {"H1": delta ** 3, "H2": delta ** 1.5, "H3": delta}[family]


def hd_psi_scalar(family, eps, delta):
    """Scalar bump in local time, supported in (0, width].

    H1: eps delta^3 S(t / delta^3), reaching eps delta^3 at the right end.
    H2: 2 eps delta^{3/2} P(t / delta^{3/2}), integral eps delta^3.
    H3: 2 eps delta P'(t / delta), zero integral, double integral eps delta^3.
    S is the smooth step, P the unit hump (integral 1/2).
    """
    w = family_width(family, delta)
    if family == "H1":
        return (eps * w) * smooth_step().reparam(1.0 / w)
    if family == "H2":
        return (2.0 * eps * w) * hump().reparam(1.0 / w)
    if family == "H3":
        return (2.0 * eps * delta) * hump().derivative(1).reparam(1.0 / w)
    raise ValueError(f"unknown family {family!r}")


def hd_psi_antiderivative(family, eps, delta):
    """Psi(t) = int_0^t psi for H2 and H3, in closed form."""
    w = family_width(family, delta)
    if family == "H3":
        return (2.0 * eps * delta * w) * hump().reparam(1.0 / w)
    raise ValueError("closed-form antiderivative kept only for H3")


def sym_unit(n, i, j, frame=None):
    """E with ones at (i, j) and (j, i), optionally rotated into another frame."""
    E = np.zeros((n, n))
    E[i, j] = 1.0
    E[j, i] = 1.0
    if frame is not None:
        E = frame @ E @ frame.T
    return E


@dataclass(frozen=True)
class HdPsiSpec:
    family: str
    epsilon: float
    delta: float
    indices: tuple = (0, 1)
    time_offset: float = 0.0

    @property
    def width(self):
        return family_width(self.family, self.delta)

    @property
    def support(self):
        return (self.time_offset, self.time_offset + self.width)


def build_hd_psi(spec, n, frame=None):
    """Matrix bump psi E^{ij}, shifted to start at spec.time_offset."""
    f = hd_psi_scalar(spec.family, spec.epsilon, spec.delta)
    E = sym_unit(n, *spec.indices, frame)
    return (MatrixCurve.constant(E) * f).shifted(spec.time_offset)


# --------------------------------------------------------------------------
# curvature change from a Riccati shift
# --------------------------------------------------------------------------

def _symmetrize(M):
    return MatrixCurve((lambda t, k: 0.5 * (M.jet(t, k) + np.swapaxes(M.jet(t, k), -1, -2))),
                       M.domain, M.max_order, "algebraic-combination", M.breakpoints, n=M.n,
                       symmetric=True)


def delta_r_from_psi(U, psi):
    """dR = -psi' - U psi - psi U - psi^2, symmetrised."""
    if not isinstance(U, MatrixCurve):
        U = U.as_curve()
    return _symmetrize(-psi.derivative(1) - U @ psi - psi @ U - psi @ psi)


def riccati_residual(U, R, t):
    """max |U' + U^2 + R| over t."""
    j = U.jet(t, 1)
    return float(np.max(np.abs(j[1] + j[0] @ j[0] + R(t))))


# --------------------------------------------------------------------------
# eigenvalue spread
# --------------------------------------------------------------------------

@dataclass
class EigenSeparation:
    lambdas: np.ndarray
    h_value: float
    t_star: float = None
    vectors: np.ndarray = None


def _frame(vectors):
    """Fix eigenvector signs: largest-magnitude entry of each column positive."""
    V = vectors.copy()
    for c in range(V.shape[1]):
        k = int(np.argmax(np.abs(V[:, c])))
        if V[k, c] < 0:
            V[:, c] = -V[:, c]
    return V


def eigen_separation(R_t):
    R_t = np.atleast_2d(np.asarray(R_t, dtype=float))
    lam, V = np.linalg.eigh(0.5 * (R_t + R_t.T))
    n = lam.size
    h = 1.0
    for i in range(n):
        for j in range(i + 1, n):
            h *= lam[j] - lam[i]
    return EigenSeparation(lam, float(max(h, 0.0)), None, _frame(V))


def max_h_on_interval(R, interval=(0.0, 0.5), points=1025):
    """Scan grid nodes for the largest eigenvalue spread; first maximiser wins."""
    R = as_matrix_curve(R)
    t = np.linspace(interval[0], interval[1], points)
    vals = R(t)
    best = None
    for tk, Rk in zip(t, vals):
        es = eigen_separation(Rk)
        if best is None or es.h_value > best.h_value:
            best = es
            best.t_star = float(tk)
    return best


# --------------------------------------------------------------------------
# Sp(n) chart
# --------------------------------------------------------------------------

def sp_coordinates(M):
    """a'+a'^T (i<=j), a+a^T (i<=j), b+b^T (i<=j), a-a^T (i<j); length 2n^2+n."""
    if not isinstance(M, SymplecticMap):
        M = SymplecticMap(M)
    n = M.n
    up = [(i, j) for i in range(n) for j in range(i, n)]
    strict = [(i, j) for i in range(n) for j in range(i + 1, n)]
    A, B, Ap = M.A, M.B, M.Ap
    out = [Ap[i, j] + Ap[j, i] for i, j in up]
    out += [A[i, j] + A[j, i] for i, j in up]
    out += [B[i, j] + B[j, i] for i, j in up]
    out += [A[i, j] - A[j, i] for i, j in strict]
    return np.array(out)


def chart_size(n):
    return 2 * n * n + n


def family_directions(n):
    """(scheme, i, j) in coefficient order: I, II, III on i<=j, then IV on i<j."""
    up = [(i, j) for i in range(n) for j in range(i, n)]
    strict = [(i, j) for i in range(n) for j in range(i + 1, n)]
    return ([("I", i, j) for i, j in up] + [("II", i, j) for i, j in up]
            + [("III", i, j) for i, j in up] + [("IV", i, j) for i, j in strict])


# --------------------------------------------------------------------------
# schemes
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PerturbationScheme:
    """Placement of one bump family inside a window [0, d] of local time."""

    kind: str
    indices: tuple
    epsilon: float
    delta: float
    d: float = None

    def __post_init__(self):
        if self.kind not in SCHEMES:
            raise ValueError(f"unknown scheme {self.kind!r}")
        if self.d is None:
            object.__setattr__(self, "d", self.delta ** 0.5)
        i, j = self.indices
        if self.kind == "IV" and not i < j:
            raise ValueError("scheme IV needs i < j")
        if self.width > self.d:
            raise ValueError("bump wider than the window")

    @property
    def family(self):
        return SCHEME_FAMILY[self.kind]

    @property
    def width(self):
        return family_width(self.family, self.delta)

    def psi_local(self, n, frame=None):
        """Riccati shift in window-local time."""
        f = hd_psi_scalar(self.family, self.epsilon, self.delta)
        E = MatrixCurve.constant(sym_unit(n, *self.indices, frame))
        if self.kind == "IV":
            return E * (f - f.shifted(self.d - self.width))
        return E * (self.d * f.shifted(self.d - self.width))

    def leading_local(self, n, frame=None):
        """Leading change of DP over the bump's own support (2n x 2n)."""
        E = sym_unit(n, *self.indices, frame)
        e = self.epsilon * self.delta ** 3
        Z = np.zeros((2 * n, 2 * n))
        if self.kind == "I":
            Z[n:, :n] = self.d * e * E
        elif self.kind == "II":
            Z[:n, :n] = self.d * e * E
        elif self.kind == "III":
            Z[:n, n:] = -2.0 * self.d * e * E
        else:
            Z[:n, n:] = -2.0 * e * E
        return Z


class Window:
    """A window [t0, t0 + d] of a curvature profile with its local Riccati field."""

    def __init__(self, R, t0, d, frame=None, step=DEFAULT_STEP):
        self.R = as_matrix_curve(R)
        self.n = self.R.n
        self.t0, self.d = float(t0), float(d)
        self.t1 = self.t0 + self.d
        self.frame = frame
        self.step = step
        self.U = riccati_transport(self.R, np.zeros((self.n, self.n)), (self.t0, self.t1 + 1e-12),
                                   step).as_curve()

    def delta_r(self, scheme):
        """Curvature change on [0, 1], zero outside the window."""
        psi = scheme.psi_local(self.n, self.frame).shifted(self.t0)
        dR = delta_r_from_psi(self.U, psi)
        return _in_window(dR, self.t0, self.t1, self.n)

    def perturbed(self, scheme):
        return self.R + self.delta_r(scheme)

    def dp(self, R=None, a=None, b=None):
        R = self.R if R is None else R
        a = self.t0 if a is None else a
        b = self.t1 if b is None else b
        return dp_from_curvature(R, a, b, self.step)


def _in_window(dR, t0, t1, n):
    zero = MatrixCurve.constant(np.zeros((n, n)))
    pieces = []
    if t0 > 0:
        pieces.append((0.0, t0, zero))
    pieces.append((t0, t1, dR))
    if t1 < 1.0:
        pieces.append((t1, 1.0, zero))
    out = piecewise(pieces)
    out.symmetric = True
    return out


@dataclass
class DeltaMeasurement:
    measured: np.ndarray
    predicted: np.ndarray
    leading: np.ndarray
    remainder: float


def dp_delta_measure(scheme, R, t0=0.0, frame=None, step=DEFAULT_STEP):
    """Measured and predicted change of DP(t0, t0 + d) under one scheme.

    ``leading`` is the lemma-level change over the bump's support placed in
    the window unchanged; ``predicted`` carries it to the window end through
    the unperturbed flow, the composition step DP(d) = DP(w) DP(d - w)
    (for IV, the difference of the two end effects).
    """
    win = Window(R, t0, scheme.d, frame, step)
    n = win.n
    D0 = win.dp().matrix
    D1 = win.dp(win.perturbed(scheme)).matrix
    measured = D1 - D0
    L = scheme.leading_local(n, frame)
    w = scheme.width
    if scheme.kind == "IV":
        pre = win.dp(a=win.t0 + w, b=win.t1).matrix
        post = win.dp(a=win.t0, b=win.t1 - w).matrix
        predicted = pre @ L - L @ post
    else:
        predicted = L @ win.dp(a=win.t0, b=win.t1 - w).matrix
    leading = L
    if scheme.kind == "IV":
        leading = np.zeros_like(L)
        Q = np.eye(n) if frame is None else frame
        lam = np.diag(Q.T @ win.R(win.t0) @ Q)
        i, j = scheme.indices
        e = scheme.epsilon * scheme.delta ** 3 * scheme.d
        S = np.zeros((n, n))
        A = np.zeros((n, n))
        S[i, j] = S[j, i] = 0.5 * e * (lam[i] + lam[j])
        A[i, j] = 0.5 * e * (lam[j] - lam[i])
        A[j, i] = -A[i, j]
        leading[:n, :n] = -Q @ (S + A) @ Q.T
    return DeltaMeasurement(measured, predicted, leading, max_column_sum(measured - predicted))


def antisymmetric_part(X, n):
    A = X[:n, :n]
    return 0.5 * (A - A.T)


# --------------------------------------------------------------------------
# lemma-level checks (window starts at the bump, U(0) = 0)
# --------------------------------------------------------------------------

LEMMA_EXPONENTS = {
    # block: expected remainder exponent for the change over the bump's support
    "H1": {"A": 6.0, "B": 9.0, "Ap": 9.0, "Bp": 6.0},
    "H2": {"A": 6.0, "B": 4.5, "Ap": 4.5, "Bp": 3.0},
    "H3": {"A": 4.0, "B": 5.0, "Ap": 5.0, "Bp": 4.0},
}


def lemma_blocks(family, R, eps, delta, indices=(0, 1), t0=0.0, step=DEFAULT_STEP):
    """Block remainders of Delta DP(w) after removing the leading term.

    Returns a dict block -> max-column-sum norm of (measured - leading).
    """
    spec = HdPsiSpec(family, eps, delta, indices, t0)
    R = as_matrix_curve(R)
    n = R.n
    w = spec.width
    U = riccati_transport(R, np.zeros((n, n)), (t0, t0 + w + 1e-12), step).as_curve()
    psi = build_hd_psi(spec, n)
    dR = _in_window(delta_r_from_psi(U, psi), t0, t0 + w, n)
    D0 = dp_from_curvature(R, t0, t0 + w, step).matrix
    D1 = dp_from_curvature(R + dR, t0, t0 + w, step).matrix
    X = D1 - D0
    E = sym_unit(n, *indices)
    e = eps * delta ** 3
    lead = {"A": 0 * E, "B": 0 * E, "Ap": 0 * E, "Bp": 0 * E}
    if family == "H1":
        lead["Ap"] = e * E
    elif family == "H2":
        lead["A"] = e * E
    else:
        lead["B"] = -2.0 * e * E
    blocks = {"A": X[:n, :n], "B": X[:n, n:], "Ap": X[n:, :n], "Bp": X[n:, n:]}
    rem = {k: max_column_sum(blocks[k] - lead[k]) for k in blocks}
    return rem, blocks, U, psi


def fit_slope(xs, ys, floor=1e-13):
    """Least-squares slope of log y against log x."""
    ys = np.asarray(ys, dtype=float)
    if np.any(ys < floor):
        raise DegenerateFit(f"values below noise floor {floor:g}: {ys.tolist()}")
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


# smallest remainder exponent among the non-leading blocks, per bump family
SCHEME_EXPONENTS = {"I": 6.0, "II": 3.0, "III": 4.0, "IV": 4.0}

BLOCKS = {"A": (0, 0), "B": (0, 1), "Ap": (1, 0), "Bp": (1, 1)}


def block_of(X, name, n):
    r, c = BLOCKS[name]
    return X[r * n:(r + 1) * n, c * n:(c + 1) * n]


def remainder_scaling(scheme_kind, R, deltas, eps=0.01, indices=(0, 1), t0=0.0, block=None):
    """Fitted log-log slope of ||measured - predicted|| against delta.

    ``block`` restricts the norm to one of "A", "B", "Ap", "Bp".
    Returns (slope, remainders).
    """
    if len(deltas) < 3:
        raise ValueError("need at least three values of delta")
    R = as_matrix_curve(R)
    rems = []
    for delta in deltas:
        sch = PerturbationScheme(scheme_kind, indices, eps, delta)
        m = dp_delta_measure(sch, R, t0)
        X = m.measured - m.predicted
        if block is not None:
            X = block_of(X, block, R.n)
        rems.append(max_column_sum(X))
    return fit_slope(deltas, rems), rems


def nonlinear_residual(scheme, R, t0=0.0, h_rel=1e-3):
    """Delta DP minus its part linear in epsilon.

    The linear part is a central difference in epsilon at step h_rel * eps,
    which cancels the quadratic term exactly.
    """
    from dataclasses import replace
    R = as_matrix_curve(R)
    win = Window(R, t0, scheme.d)
    D0 = win.dp().matrix

    def delta_dp(eps):
        return win.dp(win.perturbed(replace(scheme, epsilon=eps))).matrix - D0

    h = h_rel * scheme.epsilon
    lin = (delta_dp(h) - delta_dp(-h)) / (2.0 * h)
    return delta_dp(scheme.epsilon) - scheme.epsilon * lin


def lemma_dg_check(A, dA, eps, delta):
    """Worst deviation in the inverse-Gram and inverse-transpose expansions, over eps delta^4.

    A, dA: arrays (m, n, n) sampled on s in [0, delta].
    """
    A = np.asarray(A, dtype=float)
    dA = np.asarray(dA, dtype=float)
    At = A + dA
    T = lambda X: np.swapaxes(X, -1, -2)  # noqa: E731
    g0 = np.linalg.inv(T(A) @ A)
    g1 = np.linalg.inv(T(At) @ At)
    dev1 = g1 - g0 + dA + T(dA)
    dev2 = np.linalg.inv(T(At)) - np.linalg.inv(T(A)) + T(dA)
    worst = max(max(max_column_sum(x) for x in dev1), max(max_column_sum(x) for x in dev2))
    return worst / (eps * delta ** 4)


def dg_sample(R, eps, delta, indices=(0, 1), points=201, step=DEFAULT_STEP):
    """A and Delta A on [0, delta] under the H3 shift, for lemma_dg_check."""
    from .jacobi import fundamental_solution
    R = as_matrix_curve(R)
    n = R.n
    spec = HdPsiSpec("H3", eps, delta, indices, 0.0)
    U = riccati_transport(R, np.zeros((n, n)), (0.0, delta + 1e-12), step).as_curve()
    dR = _in_window(delta_r_from_psi(U, build_hd_psi(spec, n)), 0.0, delta, n)
    s = np.linspace(0.0, delta, points)
    A0 = fundamental_solution(R, 0.0, delta, step).A(s)
    A1 = fundamental_solution(R + dR, 0.0, delta, step).A(s)
    return A0, A1 - A0


# --------------------------------------------------------------------------
# realization in Sp(n)
# --------------------------------------------------------------------------

class HighDimFranks:
    """Coefficient map c -> DP(0, 1) for R + sum c_k dR_k, bumps in [t0, t0 + d]."""

    def __init__(self, R, eps, delta, d=None, t_star=None, h_min=1e-8, step=DEFAULT_STEP):
        self.R = as_matrix_curve(R)
        self.n = self.R.n
        self.eps, self.delta = float(eps), float(delta)
        self.d = float(delta ** 0.5 if d is None else d)
        sep = max_h_on_interval(self.R, (0.0, 0.5))
        if sep.h_value < h_min:
            raise NoDistinctEigenvalues(
                f"largest eigenvalue spread on [0, 1/2] is {sep.h_value:.3g}")
        self.separation = sep
        self.t0 = sep.t_star if t_star is None else float(t_star)
        if self.t0 + self.d > 1.0:
            self.t0 = 1.0 - self.d
        self.frame = eigen_separation(self.R(self.t0)).vectors
        self.window = Window(self.R, self.t0, self.d, self.frame, step)
        self.directions = family_directions(self.n)
        self.schemes = [PerturbationScheme(kind, (i, j), self.eps, self.delta, self.d)
                        for kind, i, j in self.directions]
        self.delta_rs = [self.window.delta_r(s) for s in self.schemes]
        bps = [b for dr in self.delta_rs for b in dr.breakpoints] + list(self.R.breakpoints)
        w0, w1 = self.window.t0, self.window.t1
        self.grid = TimeGrid(w0, w1, step, [b for b in bps if w0 < b < w1])
        n = self.n
        self._base = [np.asarray(v).reshape(-1, n, n) for v in sample_steps(self.R, self.grid)]
        self._dr = [[np.asarray(v).reshape(-1, n, n) for v in sample_steps(dr, self.grid)]
                    for dr in self.delta_rs]
        I = np.eye(2 * n)
        self.pre = dp_from_curvature(self.R, 0.0, w0, step).matrix if w0 > 0 else I
        self.post = dp_from_curvature(self.R, w1, 1.0, step).matrix if w1 < 1.0 else I

    def window_map(self, c):
        n = self.n
        c = np.asarray(c, dtype=float)
        Rs, Rm, Re = (self._base[m] + sum(c[k] * self._dr[k][m] for k in range(len(c)) if c[k] != 0.0)
                      for m in range(3))
        Y0 = np.hstack([np.eye(n), np.zeros((n, n))])
        P0 = np.hstack([np.zeros((n, n)), np.eye(n)])
        Y, P = _kernels.rk4_jacobi(self.grid.h, Rs, Rm, Re, Y0, P0)
        return np.vstack([Y[-1], P[-1]])

    def phi(self, c):
        return SymplecticMap(self.post @ self.window_map(c) @ self.pre)

    def coords(self, c):
        return sp_coordinates(self.phi(c))

    def dp(self):
        return self.phi(np.zeros(len(self.schemes)))

    def jacobian(self, c=None, fd_step=1e-5):
        m = len(self.schemes)
        c = np.zeros(m) if c is None else np.asarray(c, dtype=float)
        f0 = self.coords(c)
        Jm = np.empty((f0.size, m))
        for k in range(m):
            e = c.copy()
            e[k] += fd_step
            Jm[:, k] = (self.coords(e) - f0) / fd_step
        return Jm

    def window_jacobian(self, fd_step=1e-5, eigen_frame=True):
        """Jacobian of the window map's chart coordinates, optionally in the eigenframe."""
        m = len(self.schemes)
        Qb = np.kron(np.eye(2), self.frame)

        def co(c):
            W = self.window_map(c)
            if eigen_frame:
                W = Qb.T @ W @ Qb
            return sp_coordinates(W)

        f0 = co(np.zeros(m))
        Jm = np.empty((f0.size, m))
        for k in range(m):
            e = np.zeros(m)
            e[k] = fd_step
            Jm[:, k] = (co(e) - f0) / fd_step
        return Jm

    def sigma_min(self):
        return float(np.linalg.svd(self.jacobian(), compute_uv=False)[-1])

    def delta_est(self):
        return 0.25 * self.sigma_min()

    def realize(self, target, tol=1e-10, max_iter=50, fd_step=1e-5, enforce_ball=True):
        if symplectic_defect(target) > 1e-8:
            raise ValueError("target is not symplectic")
        goal = sp_coordinates(target)
        m = len(self.schemes)
        c = np.zeros(m)
        F = self.coords(c) - goal
        Jm = self.jacobian(c, fd_step)
        smin = float(np.linalg.svd(Jm, compute_uv=False)[-1])
        if enforce_ball:
            dist = float(np.linalg.norm(F))
            if dist > 0.25 * smin:
                raise OutOfBall(f"target at distance {dist:.3g} exceeds radius {0.25 * smin:.3g}")
        res = float(np.linalg.norm(F))
        it = 0
        while res > tol:
            if it >= max_iter:
                raise NonConvergence(f"residual {res:.3g} after {max_iter} iterations")
            if it > 0:
                Jm = self.jacobian(c, fd_step)
            it += 1
            step = np.linalg.lstsq(Jm, -F, rcond=None)[0]
            lam = 1.0
            while True:
                c_new = c + lam * step
                F_new = self.coords(c_new) - goal
                res_new = float(np.linalg.norm(F_new))
                if res_new < res or lam < 1e-4:
                    break
                lam *= 0.5
            if res_new >= res:
                break
            c, F, res = c_new, F_new, res_new
        if res > tol * 100:
            raise NonConvergence(f"damped Newton stalled at residual {res:.3g}")
        achieved = self.phi(c)
        dR = self.perturbed_delta(c)
        t = np.linspace(0.0, 1.0, 4097)
        return RealizationResult(
            coefficients=c,
            perturbed_curvature=self.R + dR,
            achieved=achieved,
            residual=float(np.linalg.norm(sp_coordinates(achieved) - goal)),
            curvature_change_c0=float(np.max(np.abs(dR(t)))),
            newton_iterations=it,
            sigma_min=smin,
        )

    def perturbed_delta(self, c):
        out = None
        for ck, dr in zip(c, self.delta_rs):
            if ck == 0.0:
                continue
            term = float(ck) * dr
            out = term if out is None else out + term
        if out is None:
            out = MatrixCurve.constant(np.zeros((self.n, self.n)))
        return out


def hamiltonian_direction(S):
    """J S for symmetric S; expm of it is symplectic."""
    S = np.asarray(S, dtype=float)
    S = 0.5 * (S + S.T)
    m = S.shape[0] // 2
    Jm = np.block([[np.zeros((m, m)), np.eye(m)], [-np.eye(m), np.zeros((m, m))]])
    return Jm @ S


def target_along(base, S, radius):
    """base . expm(r J S), with r chosen so the chart distance equals radius."""
    from scipy.linalg import expm
    from scipy.optimize import brentq
    base = base if isinstance(base, SymplecticMap) else SymplecticMap(base)
    if radius == 0:
        return SymplecticMap(base.matrix.copy())
    X = hamiltonian_direction(S)
    X = X / np.linalg.norm(X)
    c0 = sp_coordinates(base)

    def dist(r):
        return float(np.linalg.norm(sp_coordinates(base.matrix @ expm(r * X)) - c0)) - radius

    hi = radius
    while dist(hi) < 0:
        hi *= 2.0
    r = brentq(dist, 0.0, hi, xtol=1e-16, rtol=1e-14)
    return SymplecticMap(base.matrix @ expm(r * X))


def realize_target_spn(R, target, eps, delta, d=None, **kwargs):
    return HighDimFranks(R, eps, delta, d).realize(target, **kwargs)


def extend_to_unit_interval(R, window_map, t0, d, step=DEFAULT_STEP):
    """DP(t0 + d, 1) . window_map . DP(0, t0)."""
    R = as_matrix_curve(R)
    n = R.n
    W = window_map.matrix if isinstance(window_map, SymplecticMap) else np.asarray(window_map)
    I = np.eye(2 * n)
    pre = dp_from_curvature(R, 0.0, t0, step).matrix if t0 > 0 else I
    post = dp_from_curvature(R, t0 + d, 1.0, step).matrix if t0 + d < 1.0 else I
    return SymplecticMap(post @ W @ pre)


def short_time_expansion_remainder(lambdas, t):
    """||DP(t) - (I + t [[0, I], [diag(lambda), 0]])|| for constant R = diag(lambda)."""
    lam = np.asarray(lambdas, dtype=float)
    n = lam.size
    R = MatrixCurve.constant(np.diag(lam))
    D = dp_from_curvature(R, 0.0, t).matrix
    N = np.block([[np.zeros((n, n)), np.eye(n)], [np.diag(lam), np.zeros((n, n))]])
    return max_column_sum(D - np.eye(2 * n) - t * N)


__all__ = [
    "EigenSeparation", "HD_FAMILIES", "HdPsiSpec", "HighDimFranks", "PerturbationScheme",
    "SCHEMES", "Window", "build_hd_psi", "chart_size", "delta_r_from_psi", "dg_sample",
    "dp_delta_measure", "eigen_separation", "extend_to_unit_interval", "family_directions",
    "fit_slope", "hd_psi_antiderivative", "hd_psi_scalar", "lemma_blocks", "lemma_dg_check",
    "hamiltonian_direction", "max_h_on_interval", "nonlinear_residual",
    "realize_target_spn", "target_along", "remainder_scaling", "riccati_residual",
    "short_time_expansion_remainder", "sp_coordinates", "SmoothFn",
]
