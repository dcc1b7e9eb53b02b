"""Fixed-step RK4 inner loops.

Every solve in the package funnels through one of three kernels. Each exists
as an explicit-loop version compiled with ``numba.njit`` and as a numpy
version vectorised over the matrix dimensions. Setting the environment
variable ``FRANKS_DISABLE_NUMBA=1`` (or running without numba installed)
selects the numpy path; both produce the same numbers to rounding.

Coefficient samples are passed per step as ``(start, mid, end)`` triplets so
that piecewise-defined curvatures are sampled with one-sided limits at
segment boundaries.
"""

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(func):
            return func

        if args and callable(args[0]):
            return args[0]
        return wrap


def _env_disabled():
    return os.environ.get("FRANKS_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")


USE_NUMBA = HAVE_NUMBA and not _env_disabled()
BACKEND = "numba" if USE_NUMBA else "numpy"


# --------------------------------------------------------------------------
# numpy implementations
# --------------------------------------------------------------------------

def rk4_jacobi_numpy(h, Rs, Rm, Re, Y0, P0):
    """Integrate Y'' = -R Y with state (Y, P=Y').

    h: (N,), Rs/Rm/Re: (N, n, n), Y0/P0: (n, p). Returns Y, P of shape
    (N+1, n, p).
    """
    N = h.shape[0]
    Y = np.empty((N + 1,) + Y0.shape)
    P = np.empty((N + 1,) + P0.shape)
    y = Y0.astype(float).copy()
    p = P0.astype(float).copy()
    Y[0] = y
    P[0] = p
    for k in range(N):
        hk = h[k]
        k1y = p
        k1p = -Rs[k] @ y
        k2y = p + 0.5 * hk * k1p
        k2p = -Rm[k] @ (y + 0.5 * hk * k1y)
        k3y = p + 0.5 * hk * k2p
        k3p = -Rm[k] @ (y + 0.5 * hk * k2y)
        k4y = p + hk * k3p
        k4p = -Re[k] @ (y + hk * k3y)
        y = y + hk / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        p = p + hk / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        Y[k + 1] = y
        P[k + 1] = p
    return Y, P


def rk4_linear_batch_numpy(h, Ms, Mm, Me, Y0):
    """Integrate y' = M(t) y for a batch of independent systems.

    h: (N,), Ms/Mm/Me: (B, N, m, m), Y0: (B, m, p). Returns (B, N+1, m, p).
    """
    B, N = Ms.shape[0], Ms.shape[1]
    out = np.empty((B, N + 1) + Y0.shape[1:])
    y = Y0.astype(float).copy()
    out[:, 0] = y
    for k in range(N):
        hk = h[k]
        k1 = Ms[:, k] @ y
        k2 = Mm[:, k] @ (y + 0.5 * hk * k1)
        k3 = Mm[:, k] @ (y + 0.5 * hk * k2)
        k4 = Me[:, k] @ (y + hk * k3)
        y = y + hk / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[:, k + 1] = y
    return out


def rk4_riccati_numpy(h, Rs, Rm, Re, U0):
    """Integrate U' = -U^2 - R. Returns (N+1, n, n)."""
    N = h.shape[0]
    out = np.empty((N + 1,) + U0.shape)
    u = U0.astype(float).copy()
    out[0] = u
    for k in range(N):
        hk = h[k]
        k1 = -u @ u - Rs[k]
        v = u + 0.5 * hk * k1
        k2 = -v @ v - Rm[k]
        v = u + 0.5 * hk * k2
        k3 = -v @ v - Rm[k]
        v = u + hk * k3
        k4 = -v @ v - Re[k]
        u = u + hk / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[k + 1] = u
    return out


# --------------------------------------------------------------------------
# explicit-loop implementations (numba targets)
# --------------------------------------------------------------------------

@njit(cache=True)
def _matmul(A, X, out):
    n, p = X.shape
    for i in range(A.shape[0]):
        for j in range(p):
            s = 0.0
            for l in range(n):
                s += A[i, l] * X[l, j]
            out[i, j] = s


@njit(cache=True)
def _rk4_jacobi_loops(h, Rs, Rm, Re, Y0, P0):
    N = h.shape[0]
    n, p = Y0.shape
    Y = np.empty((N + 1, n, p))
    P = np.empty((N + 1, n, p))
    y = Y0.copy()
    q = P0.copy()
    Y[0] = y
    P[0] = q
    k1p = np.empty((n, p))
    k2p = np.empty((n, p))
    k3p = np.empty((n, p))
    k4p = np.empty((n, p))
    tmp = np.empty((n, p))
    for k in range(N):
        hk = h[k]
        _matmul(Rs[k], y, k1p)
        for i in range(n):
            for j in range(p):
                k1p[i, j] = -k1p[i, j]
                tmp[i, j] = y[i, j] + 0.5 * hk * q[i, j]
        _matmul(Rm[k], tmp, k2p)
        for i in range(n):
            for j in range(p):
                k2p[i, j] = -k2p[i, j]
                tmp[i, j] = y[i, j] + 0.5 * hk * (q[i, j] + 0.5 * hk * k1p[i, j])
        _matmul(Rm[k], tmp, k3p)
        for i in range(n):
            for j in range(p):
                k3p[i, j] = -k3p[i, j]
                tmp[i, j] = y[i, j] + hk * (q[i, j] + 0.5 * hk * k2p[i, j])
        _matmul(Re[k], tmp, k4p)
        for i in range(n):
            for j in range(p):
                k4p[i, j] = -k4p[i, j]
                k2y = q[i, j] + 0.5 * hk * k1p[i, j]
                k3y = q[i, j] + 0.5 * hk * k2p[i, j]
                k4y = q[i, j] + hk * k3p[i, j]
                y[i, j] = y[i, j] + hk / 6.0 * (q[i, j] + 2.0 * k2y + 2.0 * k3y + k4y)
                q[i, j] = q[i, j] + hk / 6.0 * (
                    k1p[i, j] + 2.0 * k2p[i, j] + 2.0 * k3p[i, j] + k4p[i, j]
                )
        Y[k + 1] = y
        P[k + 1] = q
    return Y, P


@njit(cache=True)
def _rk4_linear_batch_loops(h, Ms, Mm, Me, Y0):
    B, N = Ms.shape[0], Ms.shape[1]
    m, p = Y0.shape[1], Y0.shape[2]
    out = np.empty((B, N + 1, m, p))
    k1 = np.empty((m, p))
    k2 = np.empty((m, p))
    k3 = np.empty((m, p))
    k4 = np.empty((m, p))
    tmp = np.empty((m, p))
    for b in range(B):
        y = Y0[b].copy()
        out[b, 0] = y
        for k in range(N):
            hk = h[k]
            _matmul(Ms[b, k], y, k1)
            for i in range(m):
                for j in range(p):
                    tmp[i, j] = y[i, j] + 0.5 * hk * k1[i, j]
            _matmul(Mm[b, k], tmp, k2)
            for i in range(m):
                for j in range(p):
                    tmp[i, j] = y[i, j] + 0.5 * hk * k2[i, j]
            _matmul(Mm[b, k], tmp, k3)
            for i in range(m):
                for j in range(p):
                    tmp[i, j] = y[i, j] + hk * k3[i, j]
            _matmul(Me[b, k], tmp, k4)
            for i in range(m):
                for j in range(p):
                    y[i, j] = y[i, j] + hk / 6.0 * (
                        k1[i, j] + 2.0 * k2[i, j] + 2.0 * k3[i, j] + k4[i, j]
                    )
            out[b, k + 1] = y
    return out


@njit(cache=True)
def _riccati_rhs(u, R, out):
    n = u.shape[0]
    for i in range(n):
        for j in range(n):
            s = 0.0
            for l in range(n):
                s += u[i, l] * u[l, j]
            out[i, j] = -s - R[i, j]


@njit(cache=True)
def _rk4_riccati_loops(h, Rs, Rm, Re, U0):
    N = h.shape[0]
    n = U0.shape[0]
    out = np.empty((N + 1, n, n))
    u = U0.copy()
    out[0] = u
    k1 = np.empty((n, n))
    k2 = np.empty((n, n))
    k3 = np.empty((n, n))
    k4 = np.empty((n, n))
    v = np.empty((n, n))
    for k in range(N):
        hk = h[k]
        _riccati_rhs(u, Rs[k], k1)
        for i in range(n):
            for j in range(n):
                v[i, j] = u[i, j] + 0.5 * hk * k1[i, j]
        _riccati_rhs(v, Rm[k], k2)
        for i in range(n):
            for j in range(n):
                v[i, j] = u[i, j] + 0.5 * hk * k2[i, j]
        _riccati_rhs(v, Rm[k], k3)
        for i in range(n):
            for j in range(n):
                v[i, j] = u[i, j] + hk * k3[i, j]
        _riccati_rhs(v, Re[k], k4)
        for i in range(n):
            for j in range(n):
                u[i, j] = u[i, j] + hk / 6.0 * (k1[i, j] + 2.0 * k2[i, j] + 2.0 * k3[i, j] + k4[i, j])
        out[k + 1] = u
    return out


def _c(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def rk4_jacobi_numba(h, Rs, Rm, Re, Y0, P0):
    return _rk4_jacobi_loops(_c(h), _c(Rs), _c(Rm), _c(Re), _c(Y0), _c(P0))


def rk4_linear_batch_numba(h, Ms, Mm, Me, Y0):
    return _rk4_linear_batch_loops(_c(h), _c(Ms), _c(Mm), _c(Me), _c(Y0))


def rk4_riccati_numba(h, Rs, Rm, Re, U0):
    return _rk4_riccati_loops(_c(h), _c(Rs), _c(Rm), _c(Re), _c(U0))


if USE_NUMBA:
    rk4_jacobi = rk4_jacobi_numba
    rk4_linear_batch = rk4_linear_batch_numba
    rk4_riccati = rk4_riccati_numba
else:
    rk4_jacobi = rk4_jacobi_numpy
    rk4_linear_batch = rk4_linear_batch_numpy
    rk4_riccati = rk4_riccati_numpy
