"""Smooth scalar and matrix-valued curves with exact derivative propagation.

A curve is backed by a jet function ``jet_fn(t, order)`` returning an array
with derivatives 0..order stacked on the leading axis. Closed forms supply
jets of any order; ODE solutions supply as many as their coefficients allow.
Algebraic combinations propagate derivatives by the Leibniz rule.
"""

import numpy as np

from . import jets


def _intersect(d1, d2):
    lo, hi = max(d1[0], d2[0]), min(d1[1], d2[1])
    if lo > hi:
        raise ValueError(f"disjoint domains {d1} and {d2}")
    return (lo, hi)


def _min_order(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


class _Curve:
    value_shape = ()

    def __init__(self, jet_fn, domain=(-np.inf, np.inf), max_order=None,
                 provenance="closed-form", breakpoints=(), pieces=None):
        self._jet_fn = jet_fn
        self.domain = (float(domain[0]), float(domain[1]))
        self.max_order = max_order
        self.provenance = provenance
        self.breakpoints = tuple(sorted({float(b) for b in breakpoints}))
        self.pieces = pieces

    # -- evaluation -------------------------------------------------------

    def jet(self, t, order=2):
        if self.max_order is not None and order > self.max_order:
            raise ValueError(f"derivatives up to order {self.max_order} available, asked {order}")
        return self._jet_fn(np.asarray(t, dtype=float), order)

    def __call__(self, t):
        return self.jet(t, 0)[0]

    def eval(self, t):
        """Return (f, f', f'') at t."""
        j = self.jet(t, 2)
        return j[0], j[1], j[2]

    def derivative(self, m=1):
        mo = None if self.max_order is None else self.max_order - m
        return self._new(lambda t, k: self.jet(t, k + m)[m:], self.domain, mo,
                         "algebraic-combination", self.breakpoints)

    # -- construction helpers ---------------------------------------------

    def _new(self, jet_fn, domain, max_order, provenance, breakpoints=(), pieces=None):
        return type(self)._from_parts(self, jet_fn, domain, max_order, provenance, breakpoints, pieces)

    @classmethod
    def _from_parts(cls, like, jet_fn, domain, max_order, provenance, breakpoints, pieces):
        return cls(jet_fn, domain, max_order, provenance, breakpoints, pieces)

    def _combine(self, other, jet_fn):
        return self._new(jet_fn, _intersect(self.domain, other.domain),
                         _min_order(self.max_order, other.max_order),
                         "algebraic-combination", self.breakpoints + other.breakpoints)

    def shifted(self, offset):
        """t -> f(t - offset)."""
        lo, hi = self.domain
        return self._new(lambda t, k: self.jet(t - offset, k), (lo + offset, hi + offset),
                         self.max_order, self.provenance,
                         [b + offset for b in self.breakpoints])

    def reparam(self, scale, shift=0.0):
        """t -> f(scale * t + shift), scale > 0."""
        lo, hi = self.domain
        dom = ((lo - shift) / scale, (hi - shift) / scale)
        return self._new(lambda t, k: jets.rescale(self.jet(scale * t + shift, k), scale),
                         dom, self.max_order, self.provenance,
                         [(b - shift) / scale for b in self.breakpoints])

    def restrict(self, lo, hi):
        return self._new(self._jet_fn, _intersect(self.domain, (lo, hi)), self.max_order,
                         self.provenance, self.breakpoints, self.pieces)


class SmoothFn(_Curve):
    """A real function with queryable value and derivatives."""

    @classmethod
    def constant(cls, c, domain=(-np.inf, np.inf)):
        return cls(lambda t, k: jets.constant(c, t, k), domain)

    @classmethod
    def identity(cls, domain=(-np.inf, np.inf)):
        return cls(lambda t, k: jets.affine(t, k), domain)

    @classmethod
    def from_callables(cls, *derivs, domain=(-np.inf, np.inf)):
        """Build from vectorised callables f, f', f'', ... (finite order)."""
        def jet_fn(t, k):
            return np.stack([np.broadcast_to(np.asarray(derivs[m](t), float), t.shape)
                             for m in range(k + 1)])
        return cls(jet_fn, domain, max_order=len(derivs) - 1)

    @staticmethod
    def _lift(other):
        if isinstance(other, SmoothFn):
            return other
        return SmoothFn.constant(float(other))

    def __add__(self, other):
        other = self._lift(other)
        return self._combine(other, lambda t, k: self.jet(t, k) + other.jet(t, k))

    __radd__ = __add__

    def __neg__(self):
        return self._new(lambda t, k: -self.jet(t, k), self.domain, self.max_order,
                         "algebraic-combination", self.breakpoints)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, MatrixCurve):
            return NotImplemented
        if not isinstance(other, SmoothFn):
            c = float(other)
            return self._new(lambda t, k: c * self.jet(t, k), self.domain, self.max_order,
                             "algebraic-combination", self.breakpoints)
        return self._combine(other, lambda t, k: jets.mul(self.jet(t, k), other.jet(t, k)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, SmoothFn):
            return self * (1.0 / float(other))
        return self._combine(other, lambda t, k: jets.div(self.jet(t, k), other.jet(t, k)))

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def exp(self):
        return self._new(lambda t, k: jets.exp(self.jet(t, k)), self.domain, self.max_order,
                         "algebraic-combination", self.breakpoints)


class MatrixCurve(_Curve):
    """A time-dependent n x n matrix; jets have shape (K+1, *t.shape, n, n)."""

    def __init__(self, jet_fn, domain=(-np.inf, np.inf), max_order=None,
                 provenance="closed-form", breakpoints=(), pieces=None, n=None,
                 symmetric=False):
        super().__init__(jet_fn, domain, max_order, provenance, breakpoints, pieces)
        if n is None:
            n = jet_fn(np.zeros(1), 0).shape[-1]
        self.n = int(n)
        self.symmetric = bool(symmetric)

    @property
    def value_shape(self):
        return (self.n, self.n)

    @classmethod
    def _from_parts(cls, like, jet_fn, domain, max_order, provenance, breakpoints, pieces):
        return cls(jet_fn, domain, max_order, provenance, breakpoints, pieces, n=like.n,
                   symmetric=like.symmetric)

    def _with_symmetry(self, flag):
        self.symmetric = flag
        return self

    @classmethod
    def constant(cls, M, domain=(-np.inf, np.inf)):
        M = np.atleast_2d(np.asarray(M, dtype=float))
        sym = bool(np.allclose(M, M.T, rtol=0, atol=0))
        return cls(lambda t, k: jets.constant(M, t, k, M.shape), domain, n=M.shape[0],
                   symmetric=sym)

    @classmethod
    def from_entries(cls, entries, symmetric=False):
        """Assemble from an n x n nested list of SmoothFn (or numbers)."""
        n = len(entries)
        fns = [[SmoothFn._lift(e) for e in row] for row in entries]
        dom = (-np.inf, np.inf)
        mo = None
        bps = []
        for row in fns:
            for f in row:
                dom = _intersect(dom, f.domain)
                mo = _min_order(mo, f.max_order)
                bps.extend(f.breakpoints)

        def jet_fn(t, k):
            out = np.empty((k + 1,) + t.shape + (n, n))
            for i in range(n):
                for j in range(n):
                    out[..., i, j] = fns[i][j].jet(t, k)
            return out

        return cls(jet_fn, dom, mo, "algebraic-combination", bps, n=n, symmetric=symmetric)

    @classmethod
    def diagonal(cls, fns):
        n = len(fns)
        zero = SmoothFn.constant(0.0)
        rows = [[fns[i] if i == j else zero for j in range(n)] for i in range(n)]
        return cls.from_entries(rows, symmetric=True)

    @classmethod
    def from_scalar(cls, f):
        return cls.from_entries([[f]], symmetric=True)

    def entry(self, i, j):
        return SmoothFn(lambda t, k: self.jet(t, k)[..., i, j], self.domain, self.max_order,
                        self.provenance, self.breakpoints)

    @staticmethod
    def _lift(other, n):
        if isinstance(other, MatrixCurve):
            if other.n != n:
                from ..errors import DimensionMismatch
                raise DimensionMismatch(f"{other.n} vs {n}")
            return other
        M = np.asarray(other, dtype=float)
        if M.ndim == 0:
            M = M * np.eye(n)
        return MatrixCurve.constant(M)

    def __add__(self, other):
        other = self._lift(other, self.n)
        out = self._combine(other, lambda t, k: self.jet(t, k) + other.jet(t, k))
        return out._with_symmetry(self.symmetric and other.symmetric)

    __radd__ = __add__

    def __neg__(self):
        return self._new(lambda t, k: -self.jet(t, k), self.domain, self.max_order,
                         "algebraic-combination", self.breakpoints)

    def __sub__(self, other):
        return self + (-self._lift(other, self.n))

    def __rsub__(self, other):
        return (-self) + other

    def __matmul__(self, other):
        other = self._lift(other, self.n)
        out = self._combine(other, lambda t, k: jets.mul(self.jet(t, k), other.jet(t, k), matrix=True))
        return out._with_symmetry(False)

    def __rmatmul__(self, other):
        return self._lift(other, self.n) @ self

    def __mul__(self, other):
        if isinstance(other, SmoothFn):
            def jet_fn(t, k):
                f = other.jet(t, k)[..., None, None]
                return jets.mul(f, self.jet(t, k))
            return self._combine(other, jet_fn)._with_symmetry(self.symmetric)
        c = float(other)
        return self._new(lambda t, k: c * self.jet(t, k), self.domain, self.max_order,
                         "algebraic-combination", self.breakpoints)

    __rmul__ = __mul__

    @property
    def T(self):
        out = self._new(lambda t, k: np.swapaxes(self.jet(t, k), -1, -2), self.domain,
                        self.max_order, self.provenance, self.breakpoints)
        return out

    def symmetry_defect(self, t):
        M = self(t)
        return float(np.max(np.abs(M - np.swapaxes(M, -1, -2)), initial=0.0))


def piecewise(pieces):
    """Glue curves on consecutive intervals [(lo, hi, curve), ...].

    Evaluation is right-continuous at interior joints; ODE sampling uses
    each piece on its own interval, so jumps at joints are integrated
    with one-sided values.
    """
    pieces = [(float(lo), float(hi), c) for lo, hi, c in pieces]
    for (_, h0, _), (l1, _, _) in zip(pieces, pieces[1:]):
        if abs(h0 - l1) > 1e-15:
            raise ValueError("pieces must be contiguous")
    first = pieces[0][2]
    mo = None
    bps = []
    for lo, hi, c in pieces:
        mo = _min_order(mo, c.max_order)
        bps.extend([lo, hi])
        bps.extend(b for b in c.breakpoints if lo < b < hi)
    last = len(pieces) - 1

    def jet_fn(t, k):
        out = None
        for idx, (lo, hi, c) in enumerate(pieces):
            mask = (t >= lo) & ((t < hi) if idx < last else (t <= hi))
            if idx == 0:
                mask |= t < lo
            if idx == last:
                mask |= t > hi
            if not np.any(mask):
                continue
            vals = c.jet(t[mask], k)
            if out is None:
                out = np.zeros((k + 1,) + t.shape + vals.shape[1 + 1:])
            out[:, mask] = vals
        if out is None:
            out = first.jet(t, k)
        return out

    dom = (pieces[0][0], pieces[-1][1])
    if isinstance(first, MatrixCurve):
        sym = all(getattr(c, "symmetric", False) for _, _, c in pieces)
        return MatrixCurve(jet_fn, dom, mo, "algebraic-combination", bps, pieces, n=first.n,
                           symmetric=sym)
    return SmoothFn(jet_fn, dom, mo, "algebraic-combination", bps, pieces)


# --------------------------------------------------------------------------
# C-infinity primitives
# --------------------------------------------------------------------------

def sigma_fn():
    """exp(-1/u) for u > 0, zero otherwise."""
    return SmoothFn(lambda t, k: jets.sigma(jets.affine(t, k)), breakpoints=(0.0,))


def _step_jet(u):
    s0 = jets.sigma(u)
    one = np.zeros_like(u)
    one[0] = 1.0
    s1 = jets.sigma(one - u)
    return jets.div(s0, s0 + s1)


def smooth_step():
    """C-infinity step: 0 for u <= 0, 1 for u >= 1, all derivatives flat at both ends."""
    return SmoothFn(lambda t, k: _step_jet(jets.affine(t, k)), breakpoints=(0.0, 1.0))


def bump():
    """exp(-1/(u(1-u))) on (0, 1), zero elsewhere."""
    def jet_fn(t, k):
        u = jets.affine(t, k)
        one = np.zeros_like(u)
        one[0] = 1.0
        return jets.mul(jets.sigma(u), jets.sigma(one - u))
    return SmoothFn(jet_fn, breakpoints=(0.0, 1.0))


def hump():
    """Symmetric C-infinity hump on (0, 1) peaking at 1 when u = 1/2."""
    def jet_fn(t, k):
        left = _step_jet(jets.affine(t, k, 2.0, 0.0))
        right = _step_jet(jets.affine(t, k, -2.0, 2.0))
        return jets.mul(left, right)
    return SmoothFn(jet_fn, breakpoints=(0.0, 0.5, 1.0))


def sin_fn(omega=1.0, phase=0.0):
    """sin(omega t + phase) with jets of any order."""
    def jet_fn(t, k):
        arg = omega * t + phase
        out = np.empty((k + 1,) + t.shape)
        for m in range(k + 1):
            out[m] = omega ** m * np.sin(arg + m * np.pi / 2)
        return out
    return SmoothFn(jet_fn)


def cos_fn(omega=1.0, phase=0.0):
    return sin_fn(omega, phase + np.pi / 2)


def polynomial(coeffs):
    """sum coeffs[i] t**i."""
    p = np.polynomial.Polynomial(coeffs)

    def jet_fn(t, k):
        out = np.empty((k + 1,) + t.shape)
        q = p
        for m in range(k + 1):
            out[m] = q(t)
            q = q.deriv()
        return out
    return SmoothFn(jet_fn)
