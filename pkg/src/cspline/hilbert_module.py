"""
cspline Hilbert Module

The free Hilbert A-module X = A^m with <x, y> = sum_i x_i* y_i, its
submodules (stored as orthogonal projections on the flattened space) and the
finite-dimensional Riesz representation of A-linear functionals.

Flattening concatenates the flattened entries, so the standard complex
inner product of flat vectors equals tr(<x, y>).
"""

import logging
import numbers
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .algebra import (
    DEFAULT_TOL,
    AlgebraElement,
    AlgebraSpec,
    adjoint,
    left_matrix,
    mul,
    norm,
    right_matrix,
)
from .exceptions import ShapeError, ValidationError
from .linalg import DEFAULT_RCOND, DecomposedMatrix, orthonormal_columns, projector

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ModuleSpace:
    """X = A^m over a fixed algebra."""

    spec: AlgebraSpec
    rank: int

    def __post_init__(self):
        if int(self.rank) < 1:
            raise ShapeError(f"Module rank must be positive, got {self.rank}")
        object.__setattr__(self, "rank", int(self.rank))

    @property
    def flat_dim(self) -> int:
        """D = m * sum(n_k^2)."""
        return self.rank * self.spec.dim

    def zero(self) -> "ModuleVector":
        return ModuleVector(self, [self.spec.zero() for _ in range(self.rank)])

    def basis_vector(self, i: int) -> "ModuleVector":
        """e_i: the identity in slot ``i``, zero elsewhere."""
        entries = [self.spec.zero() for _ in range(self.rank)]
        entries[i] = self.spec.identity()
        return ModuleVector(self, entries)

    def random_vector(self, rng: np.random.Generator) -> "ModuleVector":
        return ModuleVector(self, [self.spec.random_element(rng) for _ in range(self.rank)])


@dataclass(frozen=True, eq=False)
class ModuleVector:
    """An m-tuple of algebra elements."""

    space: ModuleSpace
    entries: Tuple[AlgebraElement, ...]

    def __post_init__(self):
        entries = tuple(self.entries)
        if len(entries) != self.space.rank:
            raise ShapeError(
                f"Module vector has {len(entries)} entries, expected {self.space.rank}"
            )
        for i, entry in enumerate(entries):
            if entry.spec != self.space.spec:
                raise ShapeError(f"Entry {i} lives in {entry.spec}, expected {self.space.spec}")
        object.__setattr__(self, "entries", entries)

    def _check(self, other: "ModuleVector") -> None:
        if not isinstance(other, ModuleVector):
            raise TypeError(f"Expected ModuleVector, got {type(other).__name__}")
        if other.space != self.space:
            raise ShapeError(f"Module mismatch: {self.space} vs {other.space}")

    def __add__(self, other: "ModuleVector") -> "ModuleVector":
        self._check(other)
        return ModuleVector(self.space, [a + b for a, b in zip(self.entries, other.entries)])

    def __sub__(self, other: "ModuleVector") -> "ModuleVector":
        self._check(other)
        return ModuleVector(self.space, [a - b for a, b in zip(self.entries, other.entries)])

    def __neg__(self) -> "ModuleVector":
        return ModuleVector(self.space, [-a for a in self.entries])

    def __mul__(self, scalar: complex) -> "ModuleVector":
        if not isinstance(scalar, numbers.Number):
            return NotImplemented
        return ModuleVector(self.space, [scalar * a for a in self.entries])

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"ModuleVector(rank={self.space.rank}, entries={list(self.entries)})"


def inner_product(x: ModuleVector, y: ModuleVector) -> AlgebraElement:
    """<x, y> = sum_i x_i* y_i."""
    x._check(y)
    total = x.space.spec.zero()
    for a, b in zip(x.entries, y.entries):
        total = total + mul(adjoint(a), b)
    return total


def add(x: ModuleVector, y: ModuleVector) -> ModuleVector:
    return x + y


def sub(x: ModuleVector, y: ModuleVector) -> ModuleVector:
    return x - y


def scale(x: ModuleVector, scalar: complex) -> ModuleVector:
    return scalar * x


def right_multiply(x: ModuleVector, a: AlgebraElement) -> ModuleVector:
    """The right module action x . a."""
    return ModuleVector(x.space, [mul(entry, a) for entry in x.entries])


def module_norm(x: ModuleVector) -> float:
    """||x|| = ||<x, x>||^(1/2)."""
    return float(np.sqrt(norm(inner_product(x, x))))


def flatten(x: ModuleVector) -> np.ndarray:
    return np.concatenate([entry.flat for entry in x.entries])


def unflatten(space: ModuleSpace, values: np.ndarray) -> ModuleVector:
    values = np.asarray(values, dtype=complex)
    if values.shape != (space.flat_dim,):
        raise ShapeError(f"Flat vector has shape {values.shape}, expected ({space.flat_dim},)")
    d = space.spec.dim
    return ModuleVector(space, [
        AlgebraElement.from_flat(space.spec, values[i * d:(i + 1) * d])
        for i in range(space.rank)
    ])


def right_action_matrix(space: ModuleSpace, b: AlgebraElement) -> np.ndarray:
    """R_b: the matrix of x -> x . b on flattened vectors."""
    return np.kron(np.eye(space.rank), right_matrix(b))


@dataclass(frozen=True, eq=False)
class Submodule:
    """
    A-invariant subspace of X.

    ``basis`` holds orthonormal columns of the flattened subspace and
    ``projector`` the orthogonal projection basis @ basis^H.
    """

    space: ModuleSpace
    projector: np.ndarray
    basis: np.ndarray
    generators: Tuple[ModuleVector, ...]

    @classmethod
    def from_basis(
        cls,
        space: ModuleSpace,
        basis: np.ndarray,
        generators: Optional[Sequence[ModuleVector]] = None,
        validate: bool = True,
        tol: float = 1e-7
    ) -> "Submodule":
        """Wrap orthonormal columns; generators default to the columns themselves."""
        basis = np.asarray(basis, dtype=complex).reshape(space.flat_dim, -1)
        if generators is None:
            generators = [unflatten(space, column) for column in basis.T]
        submodule = cls(space, projector(basis), basis, tuple(generators))
        if validate:
            defect = submodule.invariance_defect()
            if defect > tol:
                raise ValidationError(f"Subspace is not A-invariant (defect {defect:.3e})")
        return submodule

    @classmethod
    def zero(cls, space: ModuleSpace) -> "Submodule":
        return cls.from_basis(space, np.zeros((space.flat_dim, 0)), generators=[])

    @classmethod
    def full(cls, space: ModuleSpace) -> "Submodule":
        return cls.from_basis(
            space,
            np.eye(space.flat_dim),
            generators=[space.basis_vector(i) for i in range(space.rank)],
        )

    @property
    def dim(self) -> int:
        """Complex dimension of the flattened subspace."""
        return self.basis.shape[1]

    def contains(self, x: ModuleVector, tol: float = DEFAULT_TOL) -> bool:
        v = flatten(x)
        return bool(np.linalg.norm(v - self.projector @ v) <= tol * max(1.0, np.linalg.norm(v)))

    def invariance_defect(self) -> float:
        """max_b ||(I - P) R_b Q|| over matrix units b."""
        if self.dim == 0:
            return 0.0
        worst = 0.0
        for b in self.space.spec.matrix_units():
            moved = right_action_matrix(self.space, b) @ self.basis
            leftover = moved - self.projector @ moved
            worst = max(worst, float(np.linalg.norm(leftover, 2)))
        return worst


def submodule_from_generators(
    space: ModuleSpace,
    generators: Sequence[ModuleVector],
    rcond: float = DEFAULT_RCOND
) -> Submodule:
    """Closed submodule spanned over C by {g . b : g in generators, b in a basis of A}."""
    generators = list(generators)
    for g in generators:
        if g.space != space:
            raise ShapeError("Generator does not belong to the module")
    if not generators:
        return Submodule.zero(space)

    units = space.spec.matrix_units()
    columns = np.array([
        flatten(right_multiply(g, b)) for g in generators for b in units
    ]).T
    basis = orthonormal_columns(columns, rcond=rcond)
    logger.debug("submodule from %d generators: dim %d", len(generators), basis.shape[1])
    return Submodule.from_basis(space, basis, generators=generators)


def project(Y: Submodule, x: ModuleVector) -> ModuleVector:
    """Orthogonal projection onto ``Y``."""
    if x.space != Y.space:
        raise ShapeError("Vector and submodule live in different modules")
    return unflatten(Y.space, Y.projector @ flatten(x))


def orthogonal_complement(Y: Submodule) -> Submodule:
    """Y^perp = {x : <x, y> = 0 for all y in Y}."""
    space = Y.space
    if Y.dim == 0:
        return Submodule.full(space)
    complement = DecomposedMatrix.from_matrix(Y.basis.conj().T).null_basis()
    result = Submodule.from_basis(space, complement)
    return Submodule(space, np.eye(space.flat_dim) - Y.projector, result.basis, result.generators)


def submodule_sum(first: Submodule, second: Submodule, rcond: float = DEFAULT_RCOND) -> Submodule:
    """Closed span of two submodules."""
    if first.space != second.space:
        raise ShapeError("Submodules live in different modules")
    columns = np.hstack([first.basis, second.basis])
    basis = orthonormal_columns(columns, rcond=rcond) if columns.shape[1] else columns
    return Submodule.from_basis(
        first.space, basis, generators=list(first.generators) + list(second.generators)
    )


def projector_distance(first: Submodule, second: Submodule) -> float:
    return float(np.linalg.norm(first.projector - second.projector, 2))


def dual_functional(x: ModuleVector) -> np.ndarray:
    """Matrix data of x^(y) = <x, y>, acting on flattened y with values flattened in A."""
    return np.hstack([left_matrix(adjoint(entry)) for entry in x.entries])


def functional_representer(
    space: ModuleSpace,
    tau: np.ndarray,
    tol: float = DEFAULT_TOL
) -> ModuleVector:
    """
    Riesz representer of an A-linear functional.

    Args:
        space: The module X
        tau: Matrix of shape (dim A, D) with flat(tau(y)) = tau @ flatten(y)
        tol: Relative tolerance for the A-linearity check

    Returns:
        The unique x with <x, y> = tau(y) for all y
    """
    spec = space.spec
    tau = np.asarray(tau, dtype=complex)
    if tau.shape != (spec.dim, space.flat_dim):
        raise ShapeError(f"Functional has shape {tau.shape}, expected ({spec.dim}, {space.flat_dim})")

    scale = max(1.0, float(np.linalg.norm(tau, 2)))
    for b in spec.matrix_units():
        defect = tau @ right_action_matrix(space, b) - right_matrix(b) @ tau
        if np.linalg.norm(defect, 2) > tol * scale:
            raise ValidationError("Functional is not A-linear: tau(y.a) != tau(y).a")

    entries = []
    d = spec.dim
    for i in range(space.rank):
        column_block = tau[:, i * d:(i + 1) * d]
        blocks = []
        for start, n in zip(spec.offsets, spec.block_sizes):
            # left_matrix(c) has c[p, q] at row start + p*n, column start + q*n
            rows = start + n * np.arange(n)
            blocks.append(column_block[np.ix_(rows, rows)])
        entries.append(adjoint(AlgebraElement(spec, blocks)))
    x = ModuleVector(space, entries)

    if np.linalg.norm(dual_functional(x) - tau, 2) > tol * scale:
        raise ValidationError("Functional is not of the form y -> <x, y>")
    return x


def module_vectors_close(x: ModuleVector, y: ModuleVector, tol: float = DEFAULT_TOL) -> bool:
    x._check(y)
    return bool(np.linalg.norm(flatten(x) - flatten(y)) <= tol)

