"""
cspline Forms Module

Bounded A-sesquilinear forms B(x, y) = <T x, y> carried by their Riesz
operator T, an m x m matrix over A. Radicals, positivity, ellipticity and
normality are decided on the flattened compression S = Q^H T Q of T to a
submodule with orthonormal basis Q.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Sequence, Tuple

import numpy as np

from .algebra import DEFAULT_TOL, AlgebraElement, adjoint, left_matrix, mul, norm
from .exceptions import DomainError, ShapeError, ValidationError
from .hilbert_module import (
    ModuleSpace,
    ModuleVector,
    Submodule,
    inner_product,
    right_action_matrix,
)
from .linalg import DEFAULT_RCOND, DecomposedMatrix, is_contained

logger = logging.getLogger(__name__)

OperatorMatrix = Tuple[Tuple[AlgebraElement, ...], ...]


@dataclass(frozen=True, eq=False)
class SesquilinearForm:
    """B(x, y) = <T x, y> with (T x)_i = sum_j T[i][j] x_j."""

    space: ModuleSpace
    T: OperatorMatrix

    def __post_init__(self):
        m = self.space.rank
        rows = tuple(tuple(row) for row in self.T)
        if len(rows) != m or any(len(row) != m for row in rows):
            raise ShapeError(f"Operator must be a {m}x{m} matrix over A")
        for i, row in enumerate(rows):
            for j, entry in enumerate(row):
                if entry.spec != self.space.spec:
                    raise ShapeError(f"T[{i}][{j}] lives in {entry.spec}, expected {self.space.spec}")
        object.__setattr__(self, "T", rows)

    @cached_property
    def flat_T(self) -> np.ndarray:
        """The induced D x D complex matrix."""
        return np.block([[left_matrix(entry) for entry in row] for row in self.T])

    @cached_property
    def operator_norm(self) -> float:
        return float(np.linalg.norm(self.flat_T, 2))

    @classmethod
    def from_flat(
        cls,
        space: ModuleSpace,
        matrix: np.ndarray,
        tol: float = DEFAULT_TOL
    ) -> "SesquilinearForm":
        """Recover T from a D x D matrix, which must commute with every right action."""
        matrix = np.asarray(matrix, dtype=complex)
        D = space.flat_dim
        if matrix.shape != (D, D):
            raise ShapeError(f"Operator has shape {matrix.shape}, expected ({D}, {D})")

        scale = max(1.0, float(np.linalg.norm(matrix, 2)))
        for b in space.spec.matrix_units():
            r_b = right_action_matrix(space, b)
            if np.linalg.norm(matrix @ r_b - r_b @ matrix, 2) > tol * scale:
                raise ValidationError("Operator is not A-linear")

        spec = space.spec
        d = spec.dim
        rows = []
        for i in range(space.rank):
            row = []
            for j in range(space.rank):
                tile = matrix[i * d:(i + 1) * d, j * d:(j + 1) * d]
                blocks = []
                for start, n in zip(spec.offsets, spec.block_sizes):
                    idx = start + n * np.arange(n)
                    blocks.append(tile[np.ix_(idx, idx)])
                row.append(AlgebraElement(spec, blocks))
            rows.append(row)
        form = cls(space, rows)
        if np.linalg.norm(form.flat_T - matrix, 2) > tol * scale:
            raise ValidationError("Operator is not a matrix of left multiplications")
        return form


@dataclass(frozen=True)
class RadicalReport:
    """Right radical (B(y_r, y) = 0) and left radical (B(y, y_l) = 0) of Y."""

    right_radical: Submodule
    left_radical: Submodule

    @property
    def dims(self) -> Tuple[int, int]:
        return (self.right_radical.dim, self.left_radical.dim)


def inner_product_form(space: ModuleSpace) -> SesquilinearForm:
    """B = <., .>, i.e. T = identity."""
    spec = space.spec
    return SesquilinearForm(space, [
        [spec.identity() if i == j else spec.zero() for j in range(space.rank)]
        for i in range(space.rank)
    ])


def form_norm(B: SesquilinearForm) -> float:
    """||B|| = ||T||, the operator norm of the flattened Riesz operator."""
    return B.operator_norm


def operator_apply(B: SesquilinearForm, x: ModuleVector) -> ModuleVector:
    """T x."""
    if x.space != B.space:
        raise ShapeError("Vector and form live in different modules")
    spec = B.space.spec
    entries = []
    for row in B.T:
        total = spec.zero()
        for t, xj in zip(row, x.entries):
            total = total + mul(t, xj)
        entries.append(total)
    return ModuleVector(B.space, entries)


def apply_form(B: SesquilinearForm, x: ModuleVector, y: ModuleVector) -> AlgebraElement:
    """B(x, y) = <T x, y>; conjugate A-linear in x, A-linear in y."""
    return inner_product(operator_apply(B, x), y)


def form_values(B: SesquilinearForm) -> Dict[Tuple[int, int], AlgebraElement]:
    """Value table {(i, j): B(e_i, e_j)} on the canonical module basis."""
    basis = [B.space.basis_vector(i) for i in range(B.space.rank)]
    return {
        (i, j): apply_form(B, basis[i], basis[j])
        for i in range(B.space.rank)
        for j in range(B.space.rank)
    }


def riesz_from_values(
    space: ModuleSpace,
    values: Dict[Tuple[int, int], AlgebraElement]
) -> SesquilinearForm:
    """
    Riesz operator of the form with B(e_i, e_j) = values[(i, j)].

    Since <T e_i, e_j> = T[j][i]*, the operator is T[j][i] = values[(i, j)]*.
    """
    m = space.rank
    expected = {(i, j) for i in range(m) for j in range(m)}
    keys = set(values)
    if keys != expected:
        missing = sorted(expected - keys)
        extra = sorted(keys - expected)
        raise ValidationError(f"Value table must cover all basis pairs (missing {missing}, extra {extra})")

    rows = [[None] * m for _ in range(m)]
    for (i, j), value in values.items():
        if not isinstance(value, AlgebraElement) or value.spec != space.spec:
            raise ValidationError(f"Value at ({i}, {j}) is not an element of {space.spec}")
        if not all(np.all(np.isfinite(block)) for block in value.blocks):
            raise ValidationError(f"Value at ({i}, {j}) is not finite")
        rows[j][i] = adjoint(value)
    return SesquilinearForm(space, rows)


def adjoint_form(B: SesquilinearForm) -> SesquilinearForm:
    """The form of T*: (T*)[i][j] = T[j][i]*."""
    m = B.space.rank
    return SesquilinearForm(B.space, [[adjoint(B.T[j][i]) for j in range(m)] for i in range(m)])


def compress(B: SesquilinearForm, Y: Submodule) -> np.ndarray:
    """S = Q^H flat_T Q, the compression of T to Y in its orthonormal basis."""
    if Y.space != B.space:
        raise ShapeError("Submodule and form live in different modules")
    return Y.basis.conj().T @ B.flat_T @ Y.basis


def _decomposed_compression(B: SesquilinearForm, Y: Submodule, rcond: float) -> DecomposedMatrix:
    return DecomposedMatrix.from_matrix(compress(B, Y), rcond=rcond, scale=B.operator_norm)


def right_radical(B: SesquilinearForm, Y: Submodule, rcond: float = DEFAULT_RCOND) -> Submodule:
    """{y in Y : B(y, y') = 0 for all y' in Y} = Y intersected with ker(P T)."""
    kernel = _decomposed_compression(B, Y, rcond).null_basis()
    return Submodule.from_basis(Y.space, Y.basis @ kernel)


def left_radical(B: SesquilinearForm, Y: Submodule, rcond: float = DEFAULT_RCOND) -> Submodule:
    """{y in Y : B(y', y) = 0 for all y' in Y} = Y intersected with ker(P T*)."""
    kernel = _decomposed_compression(B, Y, rcond).left_null_basis()
    return Submodule.from_basis(Y.space, Y.basis @ kernel)


def radicals(B: SesquilinearForm, Y: Submodule, rcond: float = DEFAULT_RCOND) -> RadicalReport:
    decomposed = _decomposed_compression(B, Y, rcond)
    report = RadicalReport(
        right_radical=Submodule.from_basis(Y.space, Y.basis @ decomposed.null_basis()),
        left_radical=Submodule.from_basis(Y.space, Y.basis @ decomposed.left_null_basis()),
    )
    logger.debug("radicals of %d-dim submodule: %s", Y.dim, report.dims)
    return report


def null_membership(B: SesquilinearForm, y: ModuleVector, tol: float = DEFAULT_TOL) -> bool:
    """Membership in Y_1 = {y : B(y, y) = 0}."""
    return norm(apply_form(B, y, y)) <= tol


def _hermitian_part(S: np.ndarray) -> np.ndarray:
    return (S + S.conj().T) / 2


def is_positive_on(B: SesquilinearForm, Y: Submodule, tol: float = DEFAULT_TOL) -> bool:
    """
    B(y, y) >= 0 in A for every y in Y.

    The compression is A-linear, and the flattened space is a faithful
    representation of the adjointable operators, so positivity in A is
    ordinary positive semidefiniteness of S.
    """
    S = compress(B, Y)
    if S.size == 0:
        return True
    if np.linalg.norm(S - S.conj().T, 2) > tol:
        return False
    return bool(np.linalg.eigvalsh(_hermitian_part(S)).min() >= -tol)


def ellipticity_constant(B: SesquilinearForm, Y: Submodule, tol: float = DEFAULT_TOL) -> float:
    """Largest c >= 0 with B(y, y) >= c <y, y> on Y (inf on the zero submodule)."""
    if not is_positive_on(B, Y, tol):
        raise DomainError("Ellipticity is only defined for forms positive on the submodule")
    if Y.dim == 0:
        return math.inf
    smallest = float(np.linalg.eigvalsh(_hermitian_part(compress(B, Y))).min())
    return max(smallest, 0.0)


def is_normal_on(
    B: SesquilinearForm,
    Y: Submodule,
    tol: float = 1e-8,
    rcond: float = DEFAULT_RCOND
) -> bool:
    """PTP and PT*P have the same kernel on Y."""
    decomposed = _decomposed_compression(B, Y, rcond)
    kernel = decomposed.null_basis()
    adjoint_kernel = decomposed.left_null_basis()
    if kernel.shape[1] != adjoint_kernel.shape[1]:
        return False
    return is_contained(kernel, adjoint_kernel, tol) and is_contained(adjoint_kernel, kernel, tol)


def form_from_operator_rows(space: ModuleSpace, rows: Sequence[Sequence[complex]]) -> SesquilinearForm:
    """Form whose operator has scalar entries rows[i][j] * 1."""
    return SesquilinearForm(space, [[space.spec.scalar(value) for value in row] for row in rows])
