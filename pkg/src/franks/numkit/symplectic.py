"""Symplectic 2n x 2n maps in Jacobi-field block form [[A, B], [A', B']]."""

import numpy as np

from ..errors import DimensionMismatch
from .norms import max_column_sum


def J(n):
    Z = np.zeros((n, n))
    I = np.eye(n)
    return np.block([[Z, I], [-I, Z]])


class SymplecticMap:
    """A 2n x 2n real matrix viewed through its four n x n blocks."""

    __slots__ = ("matrix", "n")

    def __init__(self, matrix):
        M = np.array(matrix, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] % 2:
            raise DimensionMismatch(f"expected a 2n x 2n matrix, got shape {M.shape}")
        M.setflags(write=False)
        self.matrix = M
        self.n = M.shape[0] // 2

    @classmethod
    def from_blocks(cls, A, B, Ap, Bp):
        return cls(np.block([[np.atleast_2d(A), np.atleast_2d(B)],
                             [np.atleast_2d(Ap), np.atleast_2d(Bp)]]))

    @classmethod
    def identity(cls, n):
        return cls(np.eye(2 * n))

    @property
    def A(self):
        return self.matrix[: self.n, : self.n]

    @property
    def B(self):
        return self.matrix[: self.n, self.n:]

    @property
    def Ap(self):
        return self.matrix[self.n:, : self.n]

    @property
    def Bp(self):
        return self.matrix[self.n:, self.n:]

    def defect(self):
        return symplectic_defect(self)

    def __matmul__(self, other):
        return compose(self, other)

    def __sub__(self, other):
        return self.matrix - other.matrix

    def __repr__(self):
        return f"SymplecticMap(n={self.n}, matrix={self.matrix.tolist()})"


def _matrix(M):
    return M.matrix if isinstance(M, SymplecticMap) else np.asarray(M, dtype=float)


def symplectic_defect(M):
    """||M^T J M - J|| in the max-column-sum norm."""
    X = _matrix(M)
    Jn = J(X.shape[0] // 2)
    return max_column_sum(X.T @ Jn @ X - Jn)


def compose(M2, M1):
    """M2 . M1 (apply M1 first)."""
    M2 = M2 if isinstance(M2, SymplecticMap) else SymplecticMap(M2)
    M1 = M1 if isinstance(M1, SymplecticMap) else SymplecticMap(M1)
    if M2.n != M1.n:
        raise DimensionMismatch(f"cannot compose n={M2.n} with n={M1.n}")
    return SymplecticMap(M2.matrix @ M1.matrix)


def symplectic_inverse(M):
    """-J M^T J, exact for symplectic M."""
    Jn = J(M.n)
    return SymplecticMap(-Jn @ M.matrix.T @ Jn)


def map_distance(M1, M2):
    return max_column_sum(_matrix(M1) - _matrix(M2))
