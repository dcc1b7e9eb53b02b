import numpy as np

from franks.jacobi import fundamental_solution
from franks.numkit import MatrixCurve, SmoothFn, sin_fn


def random_scalar_profile(rng, bound):
    """c0 + c1 sin(w t + p) + c2 sin(w2 t + p2) with sup |k| <= bound."""
    c = rng.uniform(-1.0, 1.0, 3)
    c *= bound / np.sum(np.abs(c))
    w = rng.uniform(1.0, 8.0, 2)
    p = rng.uniform(0.0, 2 * np.pi, 2)
    return c[0] + c[1] * sin_fn(w[0], p[0]) + c[2] * sin_fn(w[1], p[1])


def random_symmetric_profile(rng, n, bound):
    """Symmetric R(t) = S0 + sin(w t) S1, entries scaled so ||R|| <= bound."""
    S0 = rng.normal(size=(n, n))
    S1 = rng.normal(size=(n, n))
    S0, S1 = S0 + S0.T, S1 + S1.T
    scale = bound / (np.abs(S0).sum(axis=0).max() + np.abs(S1).sum(axis=0).max())
    s = sin_fn(rng.uniform(1.0, 8.0))
    return MatrixCurve.constant(scale * S0) + MatrixCurve.constant(scale * S1) * s


def positive_a_corpus(seed, count, bound, a_min):
    """Scalar profiles whose a-field stays above a_min on [0, 1]."""
    rng = np.random.default_rng(seed)
    out = []
    t = np.linspace(0.0, 1.0, 513)
    while len(out) < count:
        k = random_scalar_profile(rng, bound)
        if np.min(fundamental_solution(k).a(t)) >= a_min:
            out.append(k)
    return out


ZERO = SmoothFn.constant(0.0)
ONE = SmoothFn.constant(1.0)
MINUS_ONE = SmoothFn.constant(-1.0)
