"""Curvature perturbations along a geodesic on a surface.

Three families of positive bumps psi are subtracted from the Jacobi field
a (a(0)=1, a'(0)=0). Declaring a - psi a Jacobi field fixes a new
curvature k~ = -(a'' - psi'') / (a - psi). Family S1 moves a'(1), S2 moves
a(1) and S3 moves b(1); blending k + sum s_i (k~_i - k) gives a 3-parameter
family whose Poincare maps fill a neighbourhood of DP in Sp(1).
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from . import _kernels
from .errors import (
    ConstraintViolation,
    NonConvergence,
    OutOfBall,
    PositivityViolation,
)
from .jacobi import fundamental_solution, variation_of_parameters
from .numkit.norms import grid_norms, max_column_sum, sup_norm
from .numkit.ode import DEFAULT_STEP, TimeGrid, sample_steps
from .numkit.smooth import SmoothFn, hump, sigma_fn, smooth_step
from .numkit.symplectic import SymplecticMap, symplectic_defect

FAMILIES = ("S1", "S2", "S3")
SUPPORTS = {"S1": (0.75, 1.0), "S2": (0.75, 1.0), "S3": (0.25, 0.5)}
POSITIVITY_THRESHOLD = 1e-3


@dataclass(frozen=True)
class PsiSpec:
    """One member of a bump family: which constraint it meets and at what size."""

    family: str
    epsilon: float
    support: tuple = None
    constraints: tuple = field(default=())

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.support is None:
            object.__setattr__(self, "support", SUPPORTS[self.family])
        if not self.constraints:
            e = self.epsilon
            cons = {
                "S1": (("endpoint-derivative", e),),
                "S2": (("endpoint-value", e), ("endpoint-derivative", 0.0)),
                "S3": (("integral", e),),
            }[self.family]
            object.__setattr__(self, "constraints", cons + (("c2-bound", psi_constant(self.family) * e),))


def _unit_profile(family):
    """The epsilon = 1 member of each family."""
    if family == "S1":
        # e/4 * sigma(4(t - 3/4)): slope 1 and value 1/4 at t = 1
        return (np.e / 4.0) * sigma_fn().reparam(4.0, -3.0)
    if family == "S2":
        return smooth_step().reparam(4.0, -3.0)
    h = hump().reparam(4.0, -1.0)
    lo, hi = SUPPORTS["S3"]
    mass = quad(lambda t: float(h(t)), lo, hi, epsabs=0.0, epsrel=1e-12, limit=200)[0]
    return h / mass


@lru_cache(maxsize=None)
def _unit_psi(family):
    return _unit_profile(family).restrict(0.0, 1.0)


@lru_cache(maxsize=None)
def psi_constant(family):
    """C with ||psi||_{C^2} <= C eps, measured once at eps = 1 on [0, 1]."""
    return grid_norms(_unit_psi(family), 8193, (0.0, 1.0)).c2


def published_constant():
    """Single C valid for all three families."""
    return max(psi_constant(f) for f in FAMILIES)


def build_psi(spec):
    """Return the family member scaled to spec.epsilon, after checking constraints."""
    psi = spec.epsilon * _unit_psi(spec.family)
    check_psi(psi, spec)
    return psi


def check_psi(psi, spec):
    lo, hi = spec.support
    outside = np.linspace(0.0, lo, 200)
    if hi < 1.0:
        outside = np.concatenate([outside, np.linspace(hi, 1.0, 50)])
    if np.any(psi(outside) != 0.0):
        raise ConstraintViolation("support", f"nonzero outside {spec.support}")
    inside = np.linspace(lo, hi, 403)[1:-1]
    if np.any(psi(inside) <= 0.0):
        raise ConstraintViolation("positivity", "psi must be positive inside its support")
    for kind, value in spec.constraints:
        if kind == "endpoint-value":
            got = float(psi(1.0))
            ok = abs(got - value) <= 1e-12
        elif kind == "endpoint-derivative":
            got = float(psi.jet(1.0, 1)[1])
            ok = abs(got - value) <= 1e-12
        elif kind == "integral":
            got = quad(lambda t: float(psi(t)), lo, hi, epsabs=0.0, epsrel=1e-12, limit=200)[0]
            ok = abs(got - value) <= 1e-10
        elif kind == "c2-bound":
            got = grid_norms(psi, 4097, (0.0, 1.0)).c2
            ok = got <= value * (1 + 1e-9)
        else:
            raise ConstraintViolation(kind, "unknown constraint kind")
        if not ok:
            raise ConstraintViolation(kind, f"wanted {value!r}, got {got!r}")


def perturbed_curvature(a, psi, k=None):
    """k~ = -(a'' - psi'') / (a - psi), with a positivity guard on a - psi."""
    diff = a - psi
    t = np.linspace(a.domain[0], a.domain[1], 4097)
    lb = float(np.min(diff(t)))
    if lb < POSITIVITY_THRESHOLD:
        raise PositivityViolation(f"a - psi drops to {lb:.3g}")
    app = a.derivative(2)
    return -(app - psi.derivative(2)) / diff


def sp1_coords(M):
    """(a'(1), a(1), b(1)) of a 2x2 Poincare map."""
    X = M.matrix if isinstance(M, SymplecticMap) else np.asarray(M)
    return np.array([X[1, 0], X[0, 0], X[0, 1]])


def sp1_from_coords(c):
    """Inverse chart: b'(1) recovered from det = 1."""
    ap, a, b = (float(v) for v in c)
    return SymplecticMap([[a, b], [ap, (1.0 + ap * b) / a]])


class SurfaceFranks:
    """The three-family blend for a fixed curvature k and size eps."""

    def __init__(self, k, eps, step=DEFAULT_STEP):
        self.k = k if isinstance(k, SmoothFn) else SmoothFn.constant(float(k))
        self.eps = float(eps)
        self.step = step
        self.fund = fundamental_solution(self.k, 0.0, 1.0, step)
        self.a = self.fund.a
        self.b = self.fund.b
        self.psis = [build_psi(PsiSpec(f, self.eps)) for f in FAMILIES]
        self.ktildes = [perturbed_curvature(self.a, p) for p in self.psis]
        self.dks = [kt - self.k for kt in self.ktildes]
        bps = list(self.k.breakpoints)
        for p in self.psis:
            bps.extend(p.breakpoints)
        self.grid = TimeGrid(0.0, 1.0, step, [b for b in bps if 0 < b < 1])
        self._base = [np.asarray(v).reshape(-1, 1, 1) for v in sample_steps(self.k, self.grid)]
        self._dk = [[np.asarray(v).reshape(-1, 1, 1) for v in sample_steps(d, self.grid)]
                    for d in self.dks]

    def blended(self, s):
        out = self.k
        for si, d in zip(s, self.dks):
            if si != 0.0:
                out = out + float(si) * d
        return out

    def phi(self, s):
        s = np.asarray(s, dtype=float)
        Rs, Rm, Re = (self._base[m] + sum(s[i] * self._dk[i][m] for i in range(3)) for m in range(3))
        Y0 = np.array([[1.0, 0.0]])
        P0 = np.array([[0.0, 1.0]])
        Y, P = _kernels.rk4_jacobi(self.grid.h, Rs, Rm, Re, Y0, P0)
        return SymplecticMap([[Y[-1, 0, 0], Y[-1, 0, 1]], [P[-1, 0, 0], P[-1, 0, 1]]])

    def coords(self, s):
        return sp1_coords(self.phi(s))

    def dp(self):
        return self.phi(np.zeros(3))

    def dphi(self, fd_step=1.0, central=False):
        """Finite-difference Jacobian of s -> (a'(1), a(1), b(1)) at s = 0.

        The default forward step of 1 gives the columns Phi(e_i) - Phi(0),
        i.e. the entry changes produced by each full family member. With a
        small step and ``central=True`` it is the tangent map, which differs
        from the secant by O((C eps)^2).
        """
        D = np.empty((3, 3))
        base = None if central else self.coords(np.zeros(3))
        for i in range(3):
            e = np.zeros(3)
            e[i] = fd_step
            if central:
                D[:, i] = (self.coords(e) - self.coords(-e)) / (2 * fd_step)
            else:
                D[:, i] = (self.coords(e) - base) / fd_step
        return D

    def delta_est(self):
        """Radius of the ball the Newton step is trusted on: 0.25 * sigma_min(DPhi)."""
        return 0.25 * float(np.linalg.svd(self.dphi(), compute_uv=False)[-1])

    def a_bounds(self):
        t = np.linspace(0.0, 1.0, 4097)
        a = self.a(t)
        return float(np.min(a)), float(np.max(a))

    def a_minus_psi_lb(self):
        t = np.linspace(0.0, 1.0, 4097)
        a = self.a(t)
        return float(min(np.min(a - p(t)) for p in self.psis))

    def curvature_bound(self, smax):
        """(1 + ||k||_C0) C / (a - psi)_lb * max|s_i| * eps."""
        kc0 = sup_norm(self.k, 4097, (0.0, 1.0))
        return (1.0 + kc0) * published_constant() / self.a_minus_psi_lb() * smax * self.eps

    def curvature_change(self, s):
        change = sum(float(si) * d for si, d in zip(s, self.dks))
        if not isinstance(change, SmoothFn):
            return 0.0
        return sup_norm(change, 4097, (0.0, 1.0))

    def realize(self, target, tol=1e-10, max_iter=50, fd_step=1e-6, enforce_ball=True):
        if symplectic_defect(target) > 1e-8:
            raise ValueError("target is not symplectic")
        goal = sp1_coords(target)
        base = self.coords(np.zeros(3))
        if enforce_ball:
            radius = self.delta_est()
            dist = float(np.linalg.norm(goal - base))
            if dist > radius:
                raise OutOfBall(f"target at distance {dist:.3g} exceeds radius {radius:.3g}")
        s = np.zeros(3)
        F = base - goal
        res = float(np.linalg.norm(F))
        it = 0
        while res > tol:
            if it >= max_iter:
                raise NonConvergence(f"residual {res:.3g} after {max_iter} iterations")
            it += 1
            Jm = np.empty((3, 3))
            for i in range(3):
                e = np.zeros(3)
                e[i] = fd_step
                Jm[:, i] = (self.coords(s + e) - self.coords(s - e)) / (2 * fd_step)
            step = np.linalg.solve(Jm, -F)
            lam = 1.0
            while True:
                s_new = s + lam * step
                F_new = self.coords(s_new) - goal
                res_new = float(np.linalg.norm(F_new))
                if res_new < res or lam < 1e-4:
                    break
                lam *= 0.5
            if res_new >= res:
                raise NonConvergence(f"damped Newton stalled at residual {res:.3g}")
            s, F, res = s_new, F_new, res_new
        achieved = self.phi(s)
        return RealizationResult(
            coefficients=s,
            perturbed_curvature=self.blended(s),
            achieved=achieved,
            residual=float(np.linalg.norm(sp1_coords(achieved) - goal)),
            curvature_change_c0=self.curvature_change(s),
            newton_iterations=it,
        )


@dataclass
class RealizationResult:
    coefficients: np.ndarray
    perturbed_curvature: object
    achieved: SymplecticMap
    residual: float
    curvature_change_c0: float
    newton_iterations: int
    sigma_min: float = float("nan")


def phi_map(k, s, eps=0.01):
    return SurfaceFranks(k, eps).phi(s)


def dphi_matrix(k, eps=0.01, fd_step=1.0, central=False):
    return SurfaceFranks(k, eps).dphi(fd_step, central)


def realize_target_sp1(k, target, eps=0.01, **kwargs):
    return SurfaceFranks(k, eps).realize(target, **kwargs)


@dataclass
class ReplacementReport:
    distance: float
    bound: float
    predicted_column: np.ndarray
    measured_column: np.ndarray


def localized_replacement(k, k1, support_measure, step=DEFAULT_STEP):
    """Compare DP for k and k1 when k1 - k lives on a set of small measure.

    The first column of DP - DP1 equals (y(1), y'(1)) with y'' + k y =
    (k1 - k) j1, y(0) = y'(0) = 0, j1 the k1-solution with j1(0)=1, j1'(0)=0.
    The bound is C' * measure with C' = 4 M^2 ||k1-k||_C0 M1, where M bounds
    |a|,|b|,|a'|,|b'| for k and M1 bounds the k1 fundamental pair.
    """
    f0 = fundamental_solution(k, 0.0, 1.0, step)
    f1 = fundamental_solution(k1, 0.0, 1.0, step)
    D0 = f0.dp(1.0).matrix
    D1 = f1.dp(1.0).matrix
    dk = k1 - k
    a1 = f1.a
    g = dk * a1
    y, yp = variation_of_parameters(k, g, 1.0, step)
    t = np.linspace(0.0, 1.0, 4097)
    M0 = float(np.max(np.abs(np.concatenate([x.reshape(-1) for x in f0.blocks(t)]))))
    M1 = float(np.max(np.abs(f1.solution(t))))
    dk_c0 = sup_norm(dk, 4097, (0.0, 1.0))
    return ReplacementReport(
        distance=max_column_sum(D1 - D0),
        bound=4.0 * M0 ** 2 * dk_c0 * M1 * support_measure,
        predicted_column=np.array([float(y), float(yp)]),
        measured_column=(D0 - D1)[:, 0],
    )


def gram_condition(sf, points=4097):
    """Condition number of the L2 Gram matrix of k~_i - k."""
    t = np.linspace(0.0, 1.0, points)
    V = np.stack([d(t) for d in sf.dks])
    G = V @ V.T * (t[1] - t[0])
    return float(np.linalg.cond(G))
