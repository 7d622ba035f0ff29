"""
cspline Spline Module

The B-spline interpolation problem: given (X, Y, B) and x in X, find s in
x + Y with B(s, y) = 0 for all y in Y. In flattened coordinates this is the
linear system S u = -Q^H T x with S = Q^H T Q, s = x + Q u.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .algebra import DEFAULT_TOL, norm, pure_state_grid
from .exceptions import DomainError, ShapeError, ValidationError
from .forms import (
    SesquilinearForm,
    apply_form,
    compress,
    ellipticity_constant,
    is_positive_on,
    radicals,
    right_radical,
)
from .hilbert_module import ModuleSpace, ModuleVector, Submodule, flatten, unflatten
from .linalg import DEFAULT_RCOND, DecomposedMatrix, is_contained
from .localization import CoercivityTable, coercivity_estimate

logger = logging.getLogger(__name__)

CLOSED_RANGE_NOTE = (
    "P T Y is closed (finite dimension), so the radical condition is also sufficient"
)


@dataclass(frozen=True, eq=False)
class SplineProblem:
    """The triple (X, Y, B) with a target x."""

    space: ModuleSpace
    Y: Submodule
    B: SesquilinearForm
    x: ModuleVector
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if self.Y.space != self.space or self.B.space != self.space or self.x.space != self.space:
            raise ShapeError("Problem components must share one module")
        if not self.tol > 0:
            raise ValidationError(f"Tolerance must be positive, got {self.tol}")

    def with_target(self, x: ModuleVector) -> "SplineProblem":
        return SplineProblem(self.space, self.Y, self.B, x, self.tol)


@dataclass
class SplineReport:
    """Outcome of solving or analyzing one problem instance."""

    solvable: bool
    solution: Optional[ModuleVector]
    residual: float
    threshold: float
    unique: bool
    radical_dims: Tuple[int, int]
    necessary_condition: bool
    positive_on_Y: bool
    all_targets_solvable: Optional[bool] = None
    closed_range_note: Optional[str] = None
    ellipticity: Optional[float] = None
    coercivity: Optional[CoercivityTable] = None
    diagnostics: List[str] = field(default_factory=list)


@dataclass
class AnalyzeOptions:
    """Knobs for ``analyze``; coercivity estimation is off by default."""

    coercivity: bool = False
    k_grid: Sequence[float] = (1.0,)
    states_per_block: int = 64
    targets: int = 64
    candidates: int = 32
    seed: int = 0
    max_workers: Optional[int] = None
    rcond: float = DEFAULT_RCOND


@dataclass
class _LeastSquares:
    decomposed: DecomposedMatrix
    rhs: np.ndarray
    coefficients: np.ndarray
    residual: float
    threshold: float


def _least_squares(p: SplineProblem, rcond: float) -> _LeastSquares:
    T = p.B.flat_T
    fx = flatten(p.x)
    rhs = p.Y.basis.conj().T @ (T @ fx)
    S = compress(p.B, p.Y)
    decomposed = DecomposedMatrix.from_matrix(S, rcond=rcond, scale=p.B.operator_norm)
    coefficients = -decomposed.lstsq(rhs) if p.Y.dim else np.zeros(0, dtype=complex)
    residual = float(np.linalg.norm(S @ coefficients + rhs)) if p.Y.dim else 0.0
    threshold = p.tol * (1.0 + p.B.operator_norm * float(np.linalg.norm(fx)))
    return _LeastSquares(decomposed, rhs, coefficients, residual, threshold)


def solution_residual(p: SplineProblem, s: ModuleVector) -> float:
    """max over generators g of Y of ||B(s, g)||."""
    if not p.Y.generators:
        return 0.0
    return max(norm(apply_form(p.B, s, g)) for g in p.Y.generators)


def check_existence(p: SplineProblem, rcond: float = DEFAULT_RCOND) -> bool:
    """P T x lies in the range of P T P (up to the scaled tolerance)."""
    lsq = _least_squares(p, rcond)
    return lsq.residual <= lsq.threshold


def check_existence_all_targets(p: SplineProblem, rcond: float = DEFAULT_RCOND) -> bool:
    """range(P T) is contained in range(P T P): solvable for every target."""
    if p.Y.dim == 0:
        return True
    S = compress(p.B, p.Y)
    decomposed = DecomposedMatrix.from_matrix(S, rcond=rcond, scale=p.B.operator_norm)
    images = p.Y.basis.conj().T @ p.B.flat_T
    q = decomposed.range_basis()
    leftover = images - q @ (q.conj().T @ images)
    return bool(np.linalg.norm(leftover, 2) <= p.tol * (1.0 + p.B.operator_norm))


def operator_range_contained(
    B: SesquilinearForm,
    Y: Submodule,
    tol: float = 1e-8,
    rcond: float = DEFAULT_RCOND
) -> bool:
    """T(X) contained in T(Y), compared on flattened ranges."""
    T = B.flat_T
    full = DecomposedMatrix.from_matrix(T, rcond=rcond).range_basis()
    restricted = DecomposedMatrix.from_matrix(T @ Y.basis, rcond=rcond, scale=B.operator_norm)
    return is_contained(full, restricted.range_basis(), tol)


def check_uniqueness(p: SplineProblem, rcond: float = DEFAULT_RCOND) -> bool:
    """Unique solution iff the right radical of Y is {0}."""
    return right_radical(p.B, p.Y, rcond).dim == 0


def _necessary(p: SplineProblem, radical: Submodule) -> bool:
    if radical.dim == 0:
        return True
    images = p.B.flat_T.conj().T @ radical.basis
    worst = float(np.linalg.norm(images, axis=0).max())
    return worst <= p.tol * max(1.0, p.B.operator_norm)


def check_necessary_condition(p: SplineProblem, rcond: float = DEFAULT_RCOND) -> bool:
    """B(x, y_r) = 0 for all x in X and y_r in the right radical, i.e. T* kills it."""
    return _necessary(p, right_radical(p.B, p.Y, rcond))


def solve(p: SplineProblem, rcond: float = DEFAULT_RCOND) -> SplineReport:
    """
    Solve the interpolation problem for the target of ``p``.

    Returns the spline s = x + y_0 with y_0 the minimum-norm solution of
    S y_0 = -P T x. Every other solution differs from s by an element of the
    right radical. An unsolvable instance returns ``solvable=False`` and the
    best least-squares residual.
    """
    lsq = _least_squares(p, rcond)
    y0 = unflatten(p.space, p.Y.basis @ lsq.coefficients)
    s = p.x + y0
    generator_residual = solution_residual(p, s)
    solvable = lsq.residual <= lsq.threshold and generator_residual <= lsq.threshold

    rads = radicals(p.B, p.Y, rcond)
    report = SplineReport(
        solvable=solvable,
        solution=s if solvable else None,
        residual=generator_residual if solvable else lsq.residual,
        threshold=lsq.threshold,
        unique=rads.dims[0] == 0,
        radical_dims=rads.dims,
        necessary_condition=_necessary(p, rads.right_radical),
        positive_on_Y=is_positive_on(p.B, p.Y, p.tol),
    )
    if solvable and not report.unique:
        report.diagnostics.append(
            f"solutions form s + right radical ({rads.dims[0]}-dimensional)"
        )
    if not solvable:
        report.diagnostics.append("P T x is not in the range of P T P")
    logger.debug(
        "solve: solvable=%s residual=%.3e threshold=%.3e radicals=%s",
        solvable, report.residual, lsq.threshold, rads.dims,
    )
    return report


def analyze(p: SplineProblem, options: Optional[AnalyzeOptions] = None) -> SplineReport:
    """Run every checker on ``p``; optionally estimate the coercivity constants."""
    options = options or AnalyzeOptions()
    report = solve(p, options.rcond)
    report.all_targets_solvable = check_existence_all_targets(p, options.rcond)

    if report.positive_on_Y:
        report.ellipticity = ellipticity_constant(p.B, p.Y, p.tol)
        report.closed_range_note = CLOSED_RANGE_NOTE
    else:
        report.diagnostics.append("form is not positive on Y; positivity-based theorems do not apply")

    if options.coercivity:
        if report.positive_on_Y:
            states = pure_state_grid(p.space.spec, options.states_per_block, options.seed)
            report.coercivity = coercivity_estimate(
                p.B,
                p.Y,
                k_grid=options.k_grid,
                states=states,
                n_targets=options.targets,
                seed=options.seed,
                n_candidates=options.candidates,
                tol=p.tol,
                max_workers=options.max_workers,
                rcond=options.rcond,
            )
        else:
            report.diagnostics.append("coercivity skipped: form is not positive on Y")
    return report


def decompose(
    space: ModuleSpace,
    B: SesquilinearForm,
    Y: Submodule,
    tol: float = DEFAULT_TOL,
    rcond: float = DEFAULT_RCOND
) -> Tuple[Submodule, Submodule]:
    """
    Split X = S_B + Y with S_B = {s : B(s, y) = 0 for all y in Y}.

    B must be an inner product on X (positive with trivial kernel).
    """
    full = Submodule.full(space)
    if not is_positive_on(B, full, tol):
        raise DomainError("decompose needs a form that is positive on the whole module")
    if DecomposedMatrix.from_matrix(B.flat_T, rcond=rcond).rank < space.flat_dim:
        raise DomainError("decompose needs a non-degenerate form")

    constraints = Y.basis.conj().T @ B.flat_T
    kernel = DecomposedMatrix.from_matrix(constraints, rcond=rcond, scale=B.operator_norm).null_basis()
    spline_space = Submodule.from_basis(space, kernel)

    joint = DecomposedMatrix.from_matrix(np.hstack([spline_space.basis, Y.basis]), rcond=rcond)
    if spline_space.dim + Y.dim != space.flat_dim or joint.rank != space.flat_dim:
        raise ValidationError("Spline space and Y do not form a direct sum")
    return spline_space, Y
