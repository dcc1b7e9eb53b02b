"""Metrics in Fermi coordinates around a geodesic.

On a surface the strip chart is ds^2 = G(t, x)^2 dt^2 + dx^2 with G the
x-Jacobi field: G'' + K(t, x) G = 0, G(t, 0) = 1, G_x(t, 0) = 0, so that
K is the Gauss curvature and the axis x = 0 is a unit-speed geodesic. The
t-derivatives of G come from differentiating that ODE in t, so every
partial of order <= 2 is available without finite differences.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import EstimateViolated, FocalPoint, WidthExceedsChart
from .numkit import jets
from .numkit.norms import grid_norms
from .numkit.smooth import MatrixCurve, SmoothFn, _step_jet

FOCAL_THRESHOLD = 1e-3
PARTIALS = ("G", "G_t", "G_x", "G_tt", "G_tx", "G_xx")
ORDER = {"G": 0, "G_t": 1, "G_x": 1, "G_tt": 2, "G_tx": 2, "G_xx": 2}


# --------------------------------------------------------------------------
# bump in the transverse direction
# --------------------------------------------------------------------------

def _phi_jet(x, order):
    ax = np.abs(x)
    j = _step_jet(jets.affine(ax, order, -1.0 / 0.75, 1.0 / 0.75))
    sign = np.where(x < 0, -1.0, 1.0)
    for m in range(1, order + 1, 2):
        j[m] = j[m] * sign
    return j


def transverse_bump():
    """phi(x) = 1 for |x| <= 1/4, 0 for |x| >= 1, C-infinity and even."""
    return SmoothFn(_phi_jet, (-1.0, 1.0), breakpoints=(-1.0, -0.25, 0.25, 1.0))


@dataclass(frozen=True)
class BumpFunction:
    eta: float

    @property
    def phi(self):
        return transverse_bump().reparam(1.0 / self.eta)

    def jet(self, x, order=2):
        return self.phi.jet(x, order)

    def norms(self, grid_points=8193):
        return grid_norms(self.phi, grid_points, (-self.eta, self.eta))


def phi_norms(grid_points=8193):
    """C^0, C^1, C^2 norms of the unit bump, fixed once."""
    return grid_norms(transverse_bump(), grid_points, (-1.0, 1.0))


# --------------------------------------------------------------------------
# curvature on the strip
# --------------------------------------------------------------------------

class StripCurvature:
    """K(t, x) with t-derivatives up to order 2.

    ``tjet(t, x)`` returns an array (3, *shape) of K, K_t, K_tt.
    """

    def __init__(self, tjet, description=""):
        self._tjet = tjet
        self.description = description

    def tjet(self, t, x):
        t, x = np.broadcast_arrays(np.asarray(t, float), np.asarray(x, float))
        return self._tjet(t, x)

    def __call__(self, t, x):
        return self.tjet(t, x)[0]

    @classmethod
    def from_profile(cls, k):
        """Extend k(t) constantly in x."""
        if not isinstance(k, SmoothFn):
            k = SmoothFn.constant(float(k))

        def tj(t, x):
            return k.jet(t, 2) + np.zeros((3,) + x.shape)

        return cls(tj, "x-constant extension")

    @classmethod
    def constant(cls, c):
        return cls.from_profile(SmoothFn.constant(float(c)))

    @classmethod
    def from_callables(cls, K, K_t=None, K_tt=None):
        zero = lambda t, x: np.zeros_like(t)  # noqa: E731
        K_t = K_t or zero
        K_tt = K_tt or zero
        return cls(lambda t, x: np.stack([K(t, x), K_t(t, x), K_tt(t, x)]), "callables")


# --------------------------------------------------------------------------
# charts
# --------------------------------------------------------------------------

@dataclass
class MetricChart:
    """Strip chart with G and its partials on a (t, x) grid; g00 = G^2, g01 = 0, g11 = 1."""

    t: np.ndarray
    x: np.ndarray
    G: dict
    tube_width: float = None
    n: int = 1

    @property
    def axis_index(self):
        return int(np.argmin(np.abs(self.x)))

    def g00_partials(self):
        G = self.G
        return {
            "g": G["G"] ** 2,
            "g_t": 2 * G["G"] * G["G_t"],
            "g_x": 2 * G["G"] * G["G_x"],
            "g_tt": 2 * (G["G_t"] ** 2 + G["G"] * G["G_tt"]),
            "g_tx": 2 * (G["G_x"] * G["G_t"] + G["G"] * G["G_tx"]),
            "g_xx": 2 * (G["G_x"] ** 2 + G["G"] * G["G_xx"]),
        }

    def components(self):
        g = self.g00_partials()["g"]
        return {"g00": g, "g01": np.zeros_like(g), "g11": np.ones_like(g)}

    def gauss_curvature(self):
        """-G_xx / G recovered from g00 and its x-derivatives."""
        p = self.g00_partials()
        G = np.sqrt(p["g"])
        Gx = p["g_x"] / (2 * G)
        Gxx = (p["g_xx"] - 2 * Gx ** 2) / (2 * G)
        return -Gxx / G

    def axis_curvature(self):
        return self.gauss_curvature()[:, self.axis_index]

    def fermi_defect(self):
        """max |g(t,0) - I| and max |d_x g(t,0)| along the axis."""
        p = self.g00_partials()
        i = self.axis_index
        return float(np.max(np.abs(p["g"][:, i] - 1.0))), float(np.max(np.abs(p["g_x"][:, i])))

    def export_csv(self, path):
        """Rows t, x, g00, dg00/dx, d2g00/dx2 at 17 significant digits."""
        p = self.g00_partials()
        T, X = np.meshgrid(self.t, self.x, indexing="ij")
        data = np.column_stack([T.ravel(), X.ravel(), p["g"].ravel(), p["g_x"].ravel(),
                                p["g_xx"].ravel()])
        np.savetxt(path, data, fmt="%.17g", delimiter=",", header="t,x,g00,dg00_dx,d2g00_dx2",
                   comments="")


def _system(Kj):
    """6x6 matrices for (J, J', J_t, J_t', J_tt, J_tt') in the transverse variable."""
    K, Kt, Ktt = Kj
    M = np.zeros(K.shape + (6, 6))
    M[..., 0, 1] = 1.0
    M[..., 1, 0] = -K
    M[..., 2, 3] = 1.0
    M[..., 3, 0] = -Kt
    M[..., 3, 2] = -K
    M[..., 4, 5] = 1.0
    M[..., 5, 0] = -Ktt
    M[..., 5, 2] = -2 * Kt
    M[..., 5, 4] = -K
    return M


def surface_metric_from_curvature(K, t_points=1025, x_points=257, x_max=0.5, chunk=64):
    """Fermi strip chart whose Gauss curvature is K(t, x)."""
    if not isinstance(K, StripCurvature):
        K = StripCurvature.from_profile(K)
    if x_points % 2 == 0:
        x_points += 1
    t = np.linspace(0.0, 1.0, t_points)
    x = np.linspace(-x_max, x_max, x_points)
    mid = x_points // 2
    y = x[mid:] - x[mid]
    y[0] = 0.0
    hy = np.diff(y)
    ymid = y[:-1] + 0.5 * hy
    G = {k: np.empty((t_points, x_points)) for k in PARTIALS}
    y0 = np.zeros((6, 1))
    y0[0, 0] = 1.0
    for side in (1.0, -1.0):
        for lo in range(0, t_points, chunk):
            tc = t[lo: lo + chunk]
            TT, YS = np.meshgrid(tc, side * y[:-1], indexing="ij")
            _, YM = np.meshgrid(tc, side * ymid, indexing="ij")
            _, YE = np.meshgrid(tc, side * y[1:], indexing="ij")
            Ms = _system(K.tjet(TT, YS))
            Mm = _system(K.tjet(TT, YM))
            Me = _system(K.tjet(TT, YE))
            Y0 = np.broadcast_to(y0, (tc.size, 6, 1))
            sol = _kernels.rk4_linear_batch(hy, Ms, Mm, Me, Y0)[..., 0]
            Kn = K.tjet(*np.meshgrid(tc, side * y, indexing="ij"))[0]
            vals = {
                "G": sol[..., 0],
                "G_x": side * sol[..., 1],
                "G_t": sol[..., 2],
                "G_tx": side * sol[..., 3],
                "G_tt": sol[..., 4],
                "G_xx": -Kn * sol[..., 0],
            }
            for key, v in vals.items():
                if side > 0:
                    G[key][lo: lo + chunk, mid:] = v
                else:
                    G[key][lo: lo + chunk, : mid + 1] = v[:, ::-1]
    if not all(np.all(np.isfinite(v)) for v in G.values()):
        raise FocalPoint("transverse Jacobi field overflowed")
    gmin = float(np.min(G["G"]))
    if gmin < FOCAL_THRESHOLD:
        raise FocalPoint(f"transverse Jacobi field drops to {gmin:.3g} inside the strip")
    return MetricChart(t, x, G)


def _same_grid(a, b):
    if a.t.shape != b.t.shape or a.x.shape != b.x.shape:
        raise ValueError("charts live on different grids")
    if np.any(a.t != b.t) or np.any(a.x != b.x):
        raise ValueError("charts live on different grids")


def interpolate_metric(g, g_hat, eta):
    """G~ = (1 - phi_eta) G + phi_eta G^ ; identical to g wherever phi_eta vanishes."""
    _same_grid(g, g_hat)
    x_max = float(np.max(np.abs(g.x)))
    if not 0 < eta <= x_max:
        raise WidthExceedsChart(f"tube width {eta} exceeds chart half-width {x_max}")
    p = BumpFunction(eta).jet(g.x, 2)
    p0, p1, p2 = (v[None, :] for v in p)
    J, H = g.G, g_hat.G
    D = {k: H[k] - J[k] for k in PARTIALS}
    out = {
        "G": J["G"] + p0 * D["G"],
        "G_t": J["G_t"] + p0 * D["G_t"],
        "G_x": J["G_x"] + p1 * D["G"] + p0 * D["G_x"],
        "G_tt": J["G_tt"] + p0 * D["G_tt"],
        "G_tx": J["G_tx"] + p1 * D["G_t"] + p0 * D["G_tx"],
        "G_xx": J["G_xx"] + p2 * D["G"] + 2 * p1 * D["G_x"] + p0 * D["G_xx"],
    }
    # keep g untouched bit-for-bit where the bump and its derivatives vanish
    outside = (p[0] == 0.0) & (p[1] == 0.0) & (p[2] == 0.0)
    for k in PARTIALS:
        out[k][:, outside] = J[k][:, outside]
    if float(np.min(out["G"])) <= 0.0:
        raise FocalPoint("interpolated metric is degenerate")
    return MetricChart(g.t, g.x, out, tube_width=eta)


def _cr_norms(D, mask=None):
    """Cumulative max over partial orders 0, 1, 2 of grid sups."""
    sups = [0.0, 0.0, 0.0]
    for k in PARTIALS:
        v = D[k] if mask is None else D[k][:, mask]
        sups[ORDER[k]] = max(sups[ORDER[k]], float(np.max(np.abs(v))) if v.size else 0.0)
    return tuple(np.maximum.accumulate(sups).tolist())


def axis_curvature_change(g, g_hat):
    """||k^ - k||_C0 along the axis, read off the two charts."""
    return float(np.max(np.abs(g_hat.axis_curvature() - g.axis_curvature())))


def delta_estimates(g, g_hat, eta, check=True):
    """Norms of Delta = G^ - G on the tube |x| < eta, optionally checked against

    c0 <= 2 eta^2 dk, c1 <= 2 eta dk, c2 <= 2 dk with dk = ||k^ - k||_C0.
    """
    _same_grid(g, g_hat)
    mask = np.abs(g.x) < eta
    D = {k: g_hat.G[k] - g.G[k] for k in PARTIALS}
    c = _cr_norms(D, mask)
    if check:
        dk = axis_curvature_change(g, g_hat)
        bounds = (2 * eta ** 2 * dk, 2 * eta * dk, 2 * dk)
        margins = {f"c{r}": b - v for r, (b, v) in enumerate(zip(bounds, c))}
        if min(margins.values()) < 0:
            raise EstimateViolated(
                f"tube width {eta} too large for the second-order estimates", margins)
    return c


def c2_distance(g_tilde, g):
    """Grid C^2 norm over the strip of g~00 - g00 (all partials of order <= 2)."""
    _same_grid(g_tilde, g)
    a, b = g_tilde.g00_partials(), g.g00_partials()
    keys = {"g": "G", "g_t": "G_t", "g_x": "G_x", "g_tt": "G_tt", "g_tx": "G_tx", "g_xx": "G_xx"}
    D = {keys[k]: a[k] - b[k] for k in a}
    return _cr_norms(D)[2]


def c2_bound(g, g_hat):
    """8 ||phi||_C2 ||k^ - k||_C0."""
    return 8.0 * phi_norms().c2 * axis_curvature_change(g, g_hat)


# --------------------------------------------------------------------------
# higher dimension: second-order Fermi model
# --------------------------------------------------------------------------

class QuadraticFermiMetric:
    """g00(t; x) = 1 - R_kl(t) x^k x^l, g0i = 0, gij = delta_ij.

    This is the Fermi expansion of a metric to second order off the axis,
    which is all the curvature along the axis sees.
    """

    def __init__(self, R, base=None):
        self.R = R if isinstance(R, MatrixCurve) else MatrixCurve.constant(R)
        self.n = self.R.n
        self.base = base

    def g00(self, t, x):
        x = np.asarray(x, dtype=float)
        R = self.R(np.asarray(t, dtype=float))
        return 1.0 - np.einsum("...k,...kl,...l->...", x, R, x)

    def components(self, t, x):
        x = np.asarray(x, dtype=float)
        g = np.zeros(x.shape[:-1] + (self.n + 1, self.n + 1))
        g[..., 0, 0] = self.g00(t, x)
        for i in range(1, self.n + 1):
            g[..., i, i] = 1.0
        return g


def highdim_metric_from_delta_r(g, dR):
    """Shift g00 by -dR_kl x^k x^l so the axis curvature becomes R + dR."""
    if not isinstance(dR, MatrixCurve):
        dR = MatrixCurve.constant(dR)
    return QuadraticFermiMetric(g.R + dR, base=g)


class InterpolatedFermiMetric:
    """g~ = phi_eta(|x|) g1 + (1 - phi_eta(|x|)) g, radial bump."""

    def __init__(self, g, g1, eta):
        self.g, self.g1, self.eta = g, g1, eta
        self.n = g.n

    def g00(self, t, x):
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x, axis=-1)
        p = BumpFunction(self.eta).phi(r)
        return p * self.g1.g00(t, x) + (1.0 - p) * self.g.g00(t, x)


def interpolate_highdim(g, g1, eta):
    return InterpolatedFermiMetric(g, g1, eta)


def hessian_on_axis(metric, t, h=1e-3):
    """Central second differences of g00 in the transverse variables at x = 0."""
    n = metric.n
    H = np.empty((n, n))
    E = np.eye(n) * h
    f0 = metric.g00(t, np.zeros(n))
    for i in range(n):
        for j in range(n):
            if i == j:
                H[i, i] = (metric.g00(t, E[i]) - 2 * f0 + metric.g00(t, -E[i])) / h ** 2
            else:
                H[i, j] = (metric.g00(t, E[i] + E[j]) - metric.g00(t, E[i] - E[j])
                           - metric.g00(t, -E[i] + E[j]) + metric.g00(t, -E[i] - E[j])) / (4 * h * h)
    return H
