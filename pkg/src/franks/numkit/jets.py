"""Truncated derivative stacks ("jets").

A jet of order K is an array whose leading axis holds f, f', ..., f^(K)
evaluated at the same points. Arithmetic on jets applies the Leibniz rule,
so derivatives of sums, products and quotients are exact up to rounding.
"""

from math import comb

import numpy as np


def mul(f, g, matrix=False):
    """Leibniz product; ``matrix=True`` multiplies trailing (n, n) blocks."""
    K = min(f.shape[0], g.shape[0]) - 1
    op = np.matmul if matrix else np.multiply
    out = []
    for m in range(K + 1):
        acc = op(f[0], g[m])
        for j in range(1, m + 1):
            acc = acc + comb(m, j) * op(f[j], g[m - j])
        out.append(acc)
    return np.stack(out)


def div(f, g):
    """Scalar quotient f/g from f = h g solved order by order."""
    K = min(f.shape[0], g.shape[0]) - 1
    h = []
    for m in range(K + 1):
        acc = f[m].copy()
        for j in range(m):
            acc = acc - comb(m, j) * h[j] * g[m - j]
        h.append(acc / g[0])
    return np.stack(h)


def exp(g):
    """Jet of exp(g), using h' = g' h."""
    K = g.shape[0] - 1
    h = [np.exp(g[0])]
    for m in range(1, K + 1):
        acc = np.zeros_like(h[0])
        for j in range(m):
            acc = acc + comb(m - 1, j) * g[j + 1] * h[m - 1 - j]
        h.append(acc)
    return np.stack(h)


def affine(t, order, scale=1.0, shift=0.0):
    """Jet of u = scale * t + shift."""
    t = np.asarray(t, dtype=float)
    out = np.zeros((order + 1,) + t.shape)
    out[0] = scale * t + shift
    if order >= 1:
        out[1] = scale
    return out


def rescale(jet, scale):
    """Chain rule for f(scale * t + shift): the m-th slot gains scale**m."""
    factors = scale ** np.arange(jet.shape[0], dtype=float)
    return jet * factors.reshape((-1,) + (1,) * (jet.ndim - 1))


def constant(value, t, order, shape=()):
    t = np.asarray(t, dtype=float)
    out = np.zeros((order + 1,) + t.shape + tuple(shape))
    out[0] = value
    return out


def sigma(u):
    """Jet of exp(-1/u) for u > 0, identically zero for u <= 0.

    Below u = 2e-3 the function and every derivative kept here is under
    1e-200, so those points are set to exact zero to keep 0 * inf out.
    """
    K = u.shape[0] - 1
    live = u[0] > 2e-3
    safe = u.copy()
    safe[0] = np.where(live, u[0], 1.0)
    one = np.zeros_like(safe)
    one[0] = 1.0
    neg_inv = -div(one, safe)
    out = exp(neg_inv)
    out[:, ~live] = 0.0
    return out[: K + 1]
