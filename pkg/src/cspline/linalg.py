"""
cspline linear algebra helpers

Thin-SVD wrapper used for every rank decision in the package: range and
kernel bases, minimum-norm least squares and least-squares residuals.
"""

import logging
from typing import Optional

import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_RCOND = 1e-8


class DecomposedMatrix:
    """
    Matrix stored as its full SVD together with a numerical rank.

    Singular values at or below ``rcond * max(s_max, scale)`` count as zero.
    ``scale`` lets callers measure a block against the norm of the operator it
    was cut from, so a compression made only of round-off has rank 0.
    """

    @classmethod
    def from_matrix(
        cls,
        a: np.ndarray,
        rcond: float = DEFAULT_RCOND,
        scale: float = 0.0
    ) -> "DecomposedMatrix":
        """Decompose ``a`` and fix its numerical rank."""
        a = np.atleast_2d(np.asarray(a, dtype=complex))
        rows, cols = a.shape
        if a.size == 0:
            return cls(
                np.eye(rows, dtype=complex),
                np.zeros(0),
                np.eye(cols, dtype=complex),
                rank=0,
            )

        u, s, vh = np.linalg.svd(a, full_matrices=True)
        cutoff = rcond * max(float(s[0]), scale)
        rank = int(np.sum(s > cutoff))
        logger.debug("svd %dx%d: rank %d (cutoff %.3e)", rows, cols, rank, cutoff)
        return cls(u, s, vh, rank=rank)

    def __init__(self, u: np.ndarray, s: np.ndarray, vh: np.ndarray, rank: int):
        self.u = u
        self.s = s
        self.vh = vh
        self.rank = rank

    @property
    def shape(self):
        return (self.u.shape[0], self.vh.shape[1])

    @property
    def norm(self) -> float:
        return float(self.s[0]) if self.s.size else 0.0

    def range_basis(self) -> np.ndarray:
        """Orthonormal columns spanning the numerical range."""
        return self.u[:, :self.rank]

    def null_basis(self) -> np.ndarray:
        """Orthonormal columns spanning the numerical kernel."""
        return self.vh[self.rank:].conj().T

    def left_null_basis(self) -> np.ndarray:
        """Orthonormal columns spanning the kernel of the adjoint."""
        return self.u[:, self.rank:]

    def lstsq(self, b: np.ndarray) -> np.ndarray:
        """Minimum-norm ``x`` minimizing ``||A x - b||`` on the numerical range."""
        r = self.rank
        coeffs = (self.u[:, :r].conj().T @ b) / self.s[:r]
        return self.vh[:r].conj().T @ coeffs

    def residual(self, b: np.ndarray) -> float:
        """Norm of the part of ``b`` outside the numerical range."""
        q = self.range_basis()
        return float(np.linalg.norm(b - q @ (q.conj().T @ b)))


def orthonormal_columns(
    columns: np.ndarray,
    rcond: float = DEFAULT_RCOND,
    scale: Optional[float] = None
) -> np.ndarray:
    """Orthonormal basis for the column span of ``columns``."""
    decomposed = DecomposedMatrix.from_matrix(columns, rcond=rcond, scale=scale or 0.0)
    return decomposed.range_basis()


def projector(basis: np.ndarray) -> np.ndarray:
    """Orthogonal projection onto the span of orthonormal ``basis`` columns."""
    return basis @ basis.conj().T


def is_contained(inner: np.ndarray, outer: np.ndarray, tol: float) -> bool:
    """True when every orthonormal column of ``inner`` lies in span(``outer``)."""
    if inner.shape[1] == 0:
        return True
    leftover = inner - outer @ (outer.conj().T @ inner)
    return bool(np.linalg.norm(leftover, 2) <= tol)
