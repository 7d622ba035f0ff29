"""
cspline Localization Module

Pure-state localization of X = A^m. A vector state f(a) = v* a_k v turns the
semi-inner product (x, y)_f = f(<y, x>) into the Hilbert space H_f; in finite
dimensions H_f is C^(m n_k) through x -> (x_1 v, ..., x_m v) restricted to
block k.

Also hosts the numerical coercivity estimator and the truncated family
whose coercivity ratios decay like (1/2j)^2.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING, List, Optional, Sequence, Tuple

import numpy as np

from .algebra import (
    DEFAULT_TOL,
    AlgebraElement,
    AlgebraSpec,
    PureState,
    evaluate,
    pure_state_grid,
)
from .exceptions import DomainError, ValidationError
from .forms import SesquilinearForm, form_from_operator_rows, is_positive_on, operator_apply
from .hilbert_module import (
    ModuleSpace,
    ModuleVector,
    Submodule,
    flatten,
    inner_product,
    module_norm,
    submodule_from_generators,
    unflatten,
)
from .linalg import DEFAULT_RCOND, DecomposedMatrix

if TYPE_CHECKING:
    from .spline import SplineProblem

logger = logging.getLogger(__name__)

# f(|y|^2) >= k is tested with this much slack for round-off
ADMISSIBLE_SLACK = 1e-9


def localization_matrix(f: PureState, space: ModuleSpace) -> np.ndarray:
    """W with W @ flatten(x) = (x_i v)_i; rows are orthonormal."""
    spec = space.spec
    if f.spec != spec:
        raise ValidationError(f"State on {f.spec} used with a module over {spec}")
    n = spec.block_sizes[f.block]
    start = spec.offsets[f.block]
    d = spec.dim
    W = np.zeros((space.rank * n, space.flat_dim), dtype=complex)
    for i in range(space.rank):
        for p in range(n):
            columns = i * d + start + p * n + np.arange(n)
            W[i * n + p, columns] = f.vector
    return W


@dataclass(frozen=True, eq=False)
class LocalizedSpace:
    """H_f with embed(x) the class x + N_f."""

    state: PureState
    space: ModuleSpace
    embedding: np.ndarray

    @property
    def dim(self) -> int:
        return self.embedding.shape[0]

    @property
    def null_dim(self) -> int:
        """Dimension of N_f = {x : f(<x, x>) = 0}."""
        return self.space.flat_dim - self.dim

    def embed(self, x: ModuleVector) -> np.ndarray:
        return self.embedding @ flatten(x)

    def inner(self, u: np.ndarray, w: np.ndarray) -> complex:
        """(u, w)_f, linear in the first slot: (embed(x), embed(y)) = f(<y, x>)."""
        return complex(np.vdot(w, u))

    @cached_property
    def gram(self) -> np.ndarray:
        """G[i, j] = f(<b_j, b_i>) over the flat basis; D x D, small spaces only."""
        return (self.embedding.conj().T @ self.embedding).T


def localize(f: PureState, space: ModuleSpace, rcond: float = DEFAULT_RCOND) -> LocalizedSpace:
    """Build H_f for the pure state ``f``."""
    W = localization_matrix(f, space)
    rank = DecomposedMatrix.from_matrix(W, rcond=rcond).rank
    if rank != W.shape[0]:
        raise ValidationError(f"Localization map has rank {rank}, expected {W.shape[0]}")
    return LocalizedSpace(f, space, W)


def localized_functional_identity(
    f: PureState,
    x: ModuleVector,
    w: ModuleVector,
    localized: Optional[LocalizedSpace] = None
) -> float:
    """|(x + N_f, tau_f)_f - f(tau(x))| for tau = <w, .>."""
    localized = localized or localize(f, x.space)
    lhs = localized.inner(localized.embed(x), localized.embed(w))
    rhs = evaluate(f, inner_product(w, x))
    return abs(lhs - rhs)


def pair_ratio(B: SesquilinearForm, f: PureState, x: ModuleVector, y: ModuleVector) -> float:
    """|f(B(x, y))|^2 / (f(|x|^2) f(|y|^2))."""
    denominator = evaluate(f, inner_product(x, x)).real * evaluate(f, inner_product(y, y)).real
    if denominator <= 0:
        raise DomainError("Coercivity ratio needs f(|x|^2) > 0 and f(|y|^2) > 0")
    return abs(evaluate(f, inner_product(operator_apply(B, x), y))) ** 2 / denominator


def best_ratio(
    B: SesquilinearForm,
    f: PureState,
    x: ModuleVector,
    candidates: Sequence[ModuleVector],
    k: float
) -> Optional[float]:
    """
    Largest ratio over candidates y with f(|y|^2) >= k.

    Returns None when no candidate is admissible or f(|x|^2) vanishes.
    """
    fx = evaluate(f, inner_product(x, x)).real
    if fx <= 0:
        return None
    tx = operator_apply(B, x)
    best = None
    for y in candidates:
        fy = evaluate(f, inner_product(y, y)).real
        if fy < k - ADMISSIBLE_SLACK or fy <= 0:
            continue
        ratio = abs(evaluate(f, inner_product(tx, y))) ** 2 / (fx * fy)
        best = ratio if best is None else max(best, ratio)
    return best


@dataclass(frozen=True)
class CoercivityRow:
    k: float
    c_hat: float
    witnesses: int
    uncovered: int = 0


@dataclass
class CoercivityTable:
    """Estimated coercivity constants c_hat(k), a lower bound over the sampled grid."""

    rows: List[CoercivityRow]
    states: int
    targets: int
    candidates: int
    seed: int
    notes: List[str] = field(default_factory=list)

    def c_hat(self, k: float) -> float:
        for row in self.rows:
            if math.isclose(row.k, k):
                return row.c_hat
        raise KeyError(f"k={k} is not in the table")


def _module_normalized(space: ModuleSpace, columns: np.ndarray) -> np.ndarray:
    result = np.zeros_like(columns)
    for idx in range(columns.shape[1]):
        size = module_norm(unflatten(space, columns[:, idx]))
        if size > 0:
            result[:, idx] = columns[:, idx] / size
    return result


def _radical_complement(B: SesquilinearForm, Y: Submodule, rcond: float) -> np.ndarray:
    """Orthonormal basis of Y minus its right radical."""
    if Y.dim == 0:
        return Y.basis
    S = Y.basis.conj().T @ B.flat_T @ Y.basis
    kernel = DecomposedMatrix.from_matrix(S, rcond=rcond, scale=B.operator_norm).null_basis()
    if kernel.shape[1] == 0:
        return Y.basis
    coords = DecomposedMatrix.from_matrix(kernel.conj().T).null_basis()
    return Y.basis @ coords


@dataclass
class _Sample:
    targets: np.ndarray
    images: np.ndarray
    own: np.ndarray
    compressed: np.ndarray
    shared: np.ndarray


def _state_best(
    E: np.ndarray,
    sample: _Sample,
    ks: Sequence[float],
    tol: float
) -> Tuple[np.ndarray, List[np.ndarray]]:
    """Per target: validity mask and, per k, the best admissible ratio (nan if none)."""
    ex = E @ sample.targets
    wx = np.sum(np.abs(ex) ** 2, axis=0)
    etx = E @ sample.images

    # Per-target candidates x/|x| and normalized P T x
    e_own = E @ sample.own
    e_cmp = E @ sample.compressed
    num_own = np.abs(np.sum(etx.conj() * e_own, axis=0)) ** 2
    num_cmp = np.abs(np.sum(etx.conj() * e_cmp, axis=0)) ** 2
    w_own = np.sum(np.abs(e_own) ** 2, axis=0)
    w_cmp = np.sum(np.abs(e_cmp) ** 2, axis=0)

    e_shared = E @ sample.shared
    num_shared = np.abs(etx.conj().T @ e_shared) ** 2
    w_shared = np.sum(np.abs(e_shared) ** 2, axis=0)

    numerators = np.column_stack([num_own, num_cmp, num_shared])
    weights = np.column_stack([
        w_own,
        w_cmp,
        np.broadcast_to(w_shared, (wx.size, w_shared.size)),
    ])

    valid = wx > tol
    best = []
    for k in ks:
        admissible = (weights >= k - ADMISSIBLE_SLACK) & (weights > 0) & valid[:, None]
        ratios = np.full(weights.shape, -np.inf)
        denominators = wx[:, None] * weights
        np.divide(numerators, denominators, out=ratios, where=admissible)
        top = ratios.max(axis=1)
        best.append(np.where(np.isfinite(top), top, np.nan))
    return valid, best


def coercivity_estimate(
    B: SesquilinearForm,
    Y: Submodule,
    k_grid: Sequence[float] = (1.0,),
    states: Optional[Sequence[PureState]] = None,
    n_targets: int = 64,
    seed: int = 0,
    n_candidates: int = 32,
    tol: float = DEFAULT_TOL,
    max_workers: Optional[int] = None,
    rcond: float = DEFAULT_RCOND
) -> CoercivityTable:
    """
    Estimate c(k) in |f(B(x, y))|^2 >= c f(|x|^2) f(|y|^2), f(|y|^2) >= k.

    Args:
        B: Form, positive on ``Y``
        Y: Submodule the targets and candidates are drawn from
        k_grid: Values of k in (0, 1]
        states: Pure states to test (default: a seeded grid of 64 per block)
        n_targets: Unit targets drawn from Y minus its right radical
        seed: Seed for targets, candidates and default states
        n_candidates: Random candidates added to x, P T x and the Y basis
        tol: Targets with f(|x|^2) <= tol are skipped
        max_workers: Evaluate states in a thread pool when greater than 1
        rcond: Rank cutoff for the radical

    Returns:
        CoercivityTable with one row per k, sorted by k
    """
    ks = sorted({float(k) for k in k_grid})
    if not ks:
        raise ValidationError("k_grid must not be empty")
    if any(not 0 < k <= 1 for k in ks):
        raise ValidationError(f"k values must lie in (0, 1], got {ks}")
    if n_targets < 1 or n_candidates < 0:
        raise ValidationError("n_targets must be positive and n_candidates non-negative")
    if not is_positive_on(B, Y, tol):
        raise DomainError("Coercivity is only estimated for forms positive on Y")

    space = B.space
    states = list(states) if states is not None else pure_state_grid(space.spec, 64, seed)
    if not states:
        raise ValidationError("At least one pure state is required")

    complement = _radical_complement(B, Y, rcond)
    if complement.shape[1] == 0:
        return CoercivityTable(
            rows=[CoercivityRow(k, math.inf, 0) for k in ks],
            states=len(states),
            targets=0,
            candidates=0,
            seed=seed,
            notes=["Y equals its right radical; the inequality is vacuous"],
        )

    rng = np.random.default_rng(seed)
    r = complement.shape[1]
    coeffs = rng.standard_normal((r, n_targets)) + 1j * rng.standard_normal((r, n_targets))
    targets = complement @ (coeffs / np.linalg.norm(coeffs, axis=0))

    ry = Y.dim
    random_coeffs = rng.standard_normal((ry, n_candidates)) + 1j * rng.standard_normal((ry, n_candidates))
    shared = _module_normalized(space, np.hstack([Y.basis, Y.basis @ random_coeffs]))

    images = B.flat_T @ targets
    sample = _Sample(
        targets=targets,
        images=images,
        own=_module_normalized(space, targets),
        compressed=_module_normalized(space, Y.projector @ images),
        shared=shared,
    )

    def evaluate_state(f: PureState):
        return _state_best(localization_matrix(f, space), sample, ks, tol)

    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            results = list(executor.map(evaluate_state, states))
    else:
        results = [evaluate_state(f) for f in states]

    rows = []
    notes = []
    skipped = sum(int(np.sum(~valid)) for valid, _ in results)
    if skipped:
        notes.append(f"{skipped} (state, target) pairs skipped: f(|x|^2) <= tol")
    for idx, k in enumerate(ks):
        witnesses = 0
        uncovered = 0
        c_hat = math.inf
        for valid, best in results:
            values = best[idx][valid]
            witnesses += values.size
            missing = np.isnan(values)
            uncovered += int(np.sum(missing))
            if missing.any():
                c_hat = 0.0
            elif values.size:
                c_hat = min(c_hat, float(values.min()))
        if uncovered:
            notes.append(f"k={k}: {uncovered} pairs without a candidate meeting f(|y|^2) >= k; c_hat set to 0")
        if witnesses == 0:
            notes.append(f"k={k}: no (state, target) pair with f(|x|^2) > tol")
        rows.append(CoercivityRow(k, c_hat, witnesses, uncovered))
        logger.debug("coercivity k=%.3g: c_hat=%.6g over %d pairs", k, c_hat, witnesses)

    return CoercivityTable(
        rows=rows,
        states=len(states),
        targets=n_targets,
        candidates=shared.shape[1] + 2,
        seed=seed,
        notes=notes,
    )


@dataclass(frozen=True, eq=False)
class TruncatedFamily:
    """
    Truncation to 2N slots of the form B((T), (S)) = <phi(T), (S)> over M_n.

    (phi T)_j = T_j / j + T_(j+1) / sqrt(j) for even j, with the coupling
    dropped at j = 2N. Y holds the tuples whose odd slots vanish. The
    operator has scalar entries, so every rank question reduces to the
    2N x 2N coefficient matrix tensored with A.
    """

    n_block: int
    N: int
    space: ModuleSpace
    coefficients: np.ndarray
    states: Tuple[PureState, ...]
    targets: Tuple[ModuleVector, ...]

    @cached_property
    def B(self) -> SesquilinearForm:
        return form_from_operator_rows(self.space, self.coefficients)

    @property
    def even_slots(self) -> List[int]:
        """0-based indices of the 1-based even slots 2, 4, ..., 2N."""
        return list(range(1, 2 * self.N, 2))

    def right_radical_dim(self, rcond: float = DEFAULT_RCOND) -> int:
        even = self.even_slots
        compressed = self.coefficients[np.ix_(even, even)]
        decomposed = DecomposedMatrix.from_matrix(
            compressed, rcond=rcond, scale=float(np.linalg.norm(self.coefficients, 2))
        )
        return (len(even) - decomposed.rank) * self.space.spec.dim

    def generators(self) -> List[ModuleVector]:
        return [self.space.basis_vector(i) for i in self.even_slots]

    def candidates(self, x: ModuleVector, n_candidates: int = 32, seed: int = 0) -> List[ModuleVector]:
        """x, P T x, the slot generators and random elements of Y, module-normalized."""
        spec = self.space.spec
        rng = np.random.default_rng(seed)
        tx = operator_apply(self.B, x)
        compressed = ModuleVector(self.space, [
            entry if i in self.even_slots else spec.zero() for i, entry in enumerate(tx.entries)
        ])
        vectors = [x, compressed] + self.generators()
        for _ in range(n_candidates):
            entries = [spec.zero() for _ in range(self.space.rank)]
            for i in self.even_slots:
                entries[i] = spec.random_element(rng)
            vectors.append(ModuleVector(self.space, entries))

        normalized = []
        for y in vectors:
            size = module_norm(y)
            if size > 0:
                normalized.append((1.0 / size) * y)
        return normalized

    def designated_ratios(self, k: float = 1.0, n_candidates: int = 32, seed: int = 0) -> List[float]:
        """Best ratio at each designated pair (f_j, x_j), j = 1..N."""
        ratios = []
        for f, x in zip(self.states, self.targets):
            best = best_ratio(self.B, f, x, self.candidates(x, n_candidates, seed), k)
            ratios.append(0.0 if best is None else best)
        return ratios

    def divergent_target(self) -> ModuleVector:
        """x = (P_1, ..., P_2N) with P_i = e_i e_i^T."""
        n = self.n_block
        entries = []
        for i in range(2 * self.N):
            unit = np.zeros((n, n))
            unit[i, i] = 1.0
            entries.append(AlgebraElement(self.space.spec, [unit]))
        return ModuleVector(self.space, entries)

    def submodule(self) -> Submodule:
        """Dense Y; D = 2N n^2, so keep this to small sizes."""
        return submodule_from_generators(self.space, self.generators())

    def problems(self, tol: float = DEFAULT_TOL) -> List["SplineProblem"]:
        """One dense SplineProblem per designated target."""
        from .spline import SplineProblem

        Y = self.submodule()
        return [SplineProblem(self.space, Y, self.B, x, tol) for x in self.targets]


def truncation_coefficients(N: int) -> np.ndarray:
    """2N x 2N scalar matrix of phi."""
    size = 2 * N
    coefficients = np.zeros((size, size))
    for j in range(2, size + 1, 2):
        coefficients[j - 1, j - 1] = 1.0 / j
        if j < size:
            coefficients[j - 1, j] = 1.0 / math.sqrt(j)
    return coefficients


def truncated_counterexample(n_block: int, N: int) -> TruncatedFamily:
    """
    Build the truncated family over M_n with its designated pairs.

    The designated target x_j carries e_2j e_2j^T at slot 2j and f_j is the
    vector state of e_2j (1-based), j = 1..N.
    """
    if N < 1:
        raise ValidationError(f"N must be at least 1, got {N}")
    if n_block < 2 * N + 2:
        raise ValidationError(f"n_block must be at least 2N + 2 = {2 * N + 2}, got {n_block}")

    spec = AlgebraSpec((n_block,))
    space = ModuleSpace(spec, 2 * N)
    states = []
    targets = []
    for j in range(1, N + 1):
        idx = 2 * j - 1
        e = np.zeros(n_block)
        e[idx] = 1.0
        states.append(PureState(spec, 0, e))

        unit = np.zeros((n_block, n_block))
        unit[idx, idx] = 1.0
        entries = [spec.zero() for _ in range(space.rank)]
        entries[idx] = AlgebraElement(spec, [unit])
        targets.append(ModuleVector(space, entries))

    logger.debug("truncated family: n=%d N=%d D=%d", n_block, N, space.flat_dim)
    return TruncatedFamily(
        n_block=n_block,
        N=N,
        space=space,
        coefficients=truncation_coefficients(N),
        states=tuple(states),
        targets=tuple(targets),
    )
