"""
cspline Algebra Module

Finite-dimensional C*-algebras A = M_{n_1}(C) + ... + M_{n_K}(C): elements,
products, the involution, the order structure, norms and pure states.

Elements are immutable. Every operation returns a new element.
"""

import numbers
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.linalg import block_diag

from .exceptions import ShapeError, ValidationError

DEFAULT_TOL = 1e-9


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=complex)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class AlgebraSpec:
    """Block sizes (n_1, ..., n_K) of a direct sum of full matrix algebras."""

    block_sizes: Tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.block_sizes)
        if not sizes:
            raise ShapeError("An algebra needs at least one block")
        if any(n < 1 for n in sizes):
            raise ShapeError(f"Block sizes must be positive, got {sizes}")
        object.__setattr__(self, "block_sizes", sizes)

    @property
    def num_blocks(self) -> int:
        return len(self.block_sizes)

    @property
    def dim(self) -> int:
        """Complex dimension sum(n_k^2)."""
        return sum(n * n for n in self.block_sizes)

    @property
    def offsets(self) -> Tuple[int, ...]:
        """Start of each block inside the flattened element."""
        starts = [0]
        for n in self.block_sizes[:-1]:
            starts.append(starts[-1] + n * n)
        return tuple(starts)

    @property
    def is_abelian(self) -> bool:
        return all(n == 1 for n in self.block_sizes)

    def identity(self) -> "AlgebraElement":
        return AlgebraElement(self, [np.eye(n) for n in self.block_sizes])

    def zero(self) -> "AlgebraElement":
        return AlgebraElement(self, [np.zeros((n, n)) for n in self.block_sizes])

    def scalar(self, value: complex) -> "AlgebraElement":
        return AlgebraElement(self, [value * np.eye(n) for n in self.block_sizes])

    def matrix_units(self) -> List["AlgebraElement"]:
        """Complex basis {E_pq in block k}, ordered like the flattened layout."""
        units = []
        for k, n in enumerate(self.block_sizes):
            for p in range(n):
                for q in range(n):
                    blocks = [np.zeros((m, m)) for m in self.block_sizes]
                    blocks[k][p, q] = 1.0
                    units.append(AlgebraElement(self, blocks))
        return units

    def random_element(self, rng: np.random.Generator) -> "AlgebraElement":
        return AlgebraElement(self, [
            rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            for n in self.block_sizes
        ])


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    """An element of A, one square complex matrix per block."""

    spec: AlgebraSpec
    blocks: Tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.blocks) != self.spec.num_blocks:
            raise ShapeError(
                f"Expected {self.spec.num_blocks} blocks, got {len(self.blocks)}"
            )
        frozen = []
        for k, (block, n) in enumerate(zip(self.blocks, self.spec.block_sizes)):
            block = np.asarray(block, dtype=complex)
            if block.shape != (n, n):
                raise ShapeError(f"Block {k} has shape {block.shape}, expected ({n}, {n})")
            frozen.append(_frozen(block))
        object.__setattr__(self, "blocks", tuple(frozen))

    @classmethod
    def from_flat(cls, spec: AlgebraSpec, values: np.ndarray) -> "AlgebraElement":
        values = np.asarray(values, dtype=complex)
        if values.shape != (spec.dim,):
            raise ShapeError(f"Flat element has shape {values.shape}, expected ({spec.dim},)")
        blocks = [
            values[start:start + n * n].reshape(n, n)
            for start, n in zip(spec.offsets, spec.block_sizes)
        ]
        return cls(spec, blocks)

    @property
    def flat(self) -> np.ndarray:
        """Row-major concatenation of the blocks; vdot of flats is tr(a* b)."""
        return np.concatenate([block.ravel() for block in self.blocks])

    def _check(self, other: "AlgebraElement") -> None:
        if not isinstance(other, AlgebraElement):
            raise TypeError(f"Expected AlgebraElement, got {type(other).__name__}")
        if other.spec != self.spec:
            raise ShapeError(f"Algebra mismatch: {self.spec} vs {other.spec}")

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        return AlgebraElement(self.spec, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        return AlgebraElement(self.spec, [a - b for a, b in zip(self.blocks, other.blocks)])

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement(self.spec, [-a for a in self.blocks])

    def __mul__(self, scalar: complex) -> "AlgebraElement":
        if not isinstance(scalar, numbers.Number):
            return NotImplemented
        return AlgebraElement(self.spec, [scalar * a for a in self.blocks])

    __rmul__ = __mul__

    def __matmul__(self, other: "AlgebraElement") -> "AlgebraElement":
        return mul(self, other)

    def __repr__(self) -> str:
        return f"AlgebraElement(spec={self.spec.block_sizes}, blocks={[b.tolist() for b in self.blocks]})"


@dataclass(frozen=True)
class PureState:
    """Vector state a -> v* a_k v supported on block ``block`` (0-based)."""

    spec: AlgebraSpec
    block: int
    vector: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not 0 <= self.block < self.spec.num_blocks:
            raise ShapeError(f"Block index {self.block} out of range")
        vector = np.asarray(self.vector, dtype=complex)
        n = self.spec.block_sizes[self.block]
        if vector.shape != (n,):
            raise ShapeError(f"State vector has shape {vector.shape}, expected ({n},)")
        if abs(np.linalg.norm(vector) - 1.0) > 1e-12:
            raise ValidationError("Pure state vector must have unit norm")
        object.__setattr__(self, "vector", _frozen(vector))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PureState):
            return NotImplemented
        return (
            self.spec == other.spec
            and self.block == other.block
            and np.array_equal(self.vector, other.vector)
        )

    def __hash__(self) -> int:
        return hash((self.spec, self.block, self.vector.tobytes()))


def add(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    return a + b


def sub(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    return a - b


def scale(a: AlgebraElement, scalar: complex) -> AlgebraElement:
    return scalar * a


def mul(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """Blockwise product."""
    a._check(b)
    return AlgebraElement(a.spec, [x @ y for x, y in zip(a.blocks, b.blocks)])


def adjoint(a: AlgebraElement) -> AlgebraElement:
    """Blockwise conjugate transpose."""
    return AlgebraElement(a.spec, [x.conj().T for x in a.blocks])


def is_positive(a: AlgebraElement, tol: float = DEFAULT_TOL) -> bool:
    """True iff every block is Hermitian and positive semidefinite within ``tol``."""
    for block in a.blocks:
        if np.linalg.norm(block - block.conj().T, 2) > tol:
            return False
        hermitian = (block + block.conj().T) / 2
        if np.linalg.eigvalsh(hermitian).min() < -tol:
            return False
    return True


def norm(a: AlgebraElement) -> float:
    """C*-norm: the largest singular value over all blocks."""
    return max(float(np.linalg.norm(block, 2)) for block in a.blocks)


def embed(a: AlgebraElement) -> np.ndarray:
    """Dense block-diagonal matrix representing ``a``."""
    return block_diag(*a.blocks)


def left_matrix(c: AlgebraElement) -> np.ndarray:
    """Matrix of a -> c a on flattened elements."""
    return block_diag(*[
        np.kron(block, np.eye(n)) for block, n in zip(c.blocks, c.spec.block_sizes)
    ])


def right_matrix(b: AlgebraElement) -> np.ndarray:
    """Matrix of a -> a b on flattened elements."""
    return block_diag(*[
        np.kron(np.eye(n), block.T) for block, n in zip(b.blocks, b.spec.block_sizes)
    ])


def evaluate(f: PureState, a: AlgebraElement) -> complex:
    """f(a) = v* a_k v."""
    if f.spec != a.spec:
        raise ShapeError(f"State on {f.spec} applied to element of {a.spec}")
    block = a.blocks[f.block]
    return complex(np.vdot(f.vector, block @ f.vector))


def random_unit_vector(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unit vector in C^n."""
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return z / np.linalg.norm(z)


def random_state(spec: AlgebraSpec, rng: np.random.Generator) -> PureState:
    """Haar vector state on a uniformly chosen block."""
    k = int(rng.integers(spec.num_blocks))
    return PureState(spec, k, random_unit_vector(spec.block_sizes[k], rng))


def pure_state_grid(
    spec: AlgebraSpec,
    samples_per_block: int,
    seed: Optional[int] = 0
) -> List[PureState]:
    """
    Deterministic sample of pure states.

    Each block contributes all standard basis vector states followed by
    ``max(samples_per_block - n_k, 0)`` Haar-random vector states.
    """
    if samples_per_block < 1:
        raise ValidationError("samples_per_block must be at least 1")

    rng = np.random.default_rng(seed)
    states = []
    for k, n in enumerate(spec.block_sizes):
        for i in range(n):
            states.append(PureState(spec, k, np.eye(n)[i]))
        for _ in range(max(samples_per_block - n, 0)):
            states.append(PureState(spec, k, random_unit_vector(n, rng)))
    return states


def elements_close(a: AlgebraElement, b: AlgebraElement, tol: float = DEFAULT_TOL) -> bool:
    a._check(b)
    return norm(a - b) <= tol

