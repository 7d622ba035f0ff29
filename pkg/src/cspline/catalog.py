"""
cspline Example Catalog

Built-in worked instances, each run end to end and compared against its
known answer. Parameters arrive as strings from the command line and are
validated per example.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from pydantic import ValidationError as PydanticValidationError

from .algebra import DEFAULT_TOL, AlgebraElement, AlgebraSpec, evaluate, mul, pure_state_grid
from .config import Settings
from .exceptions import ValidationError
from .forms import SesquilinearForm, form_from_operator_rows
from .hilbert_module import (
    ModuleSpace,
    ModuleVector,
    Submodule,
    flatten,
    module_vectors_close,
    orthogonal_complement,
    submodule_from_generators,
    submodule_sum,
    unflatten,
)
from .localization import truncated_counterexample
from .spline import (
    AnalyzeOptions,
    SplineProblem,
    SplineReport,
    analyze,
    operator_range_contained,
    solution_residual,
    solve,
)

logger = logging.getLogger(__name__)


@dataclass
class Verdict:
    check: str
    expected: str
    measured: str
    ok: bool


@dataclass
class ExampleResult:
    """Outcome of one catalog example."""

    name: str
    description: str
    verdicts: List[Verdict]
    report: Optional[SplineReport] = None
    table: List[Dict[str, float]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(v.ok for v in self.verdicts)


class _Params(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ProjectionParams(_Params):
    seed: Optional[int] = None
    blocks: Optional[List[int]] = None
    m: int = Field(default=2, ge=2, le=8)
    z: int = Field(default=0, ge=0)

    @field_validator("blocks", mode="before")
    @classmethod
    def _split(cls, value):
        if isinstance(value, str):
            return [part for part in value.split(",") if part.strip()]
        return value

    @property
    def is_random(self) -> bool:
        return self.seed is not None or self.blocks is not None or self.z > 0


class RemarkParams(_Params):
    targets: int = Field(default=20, ge=1)


class AbelianParams(_Params):
    targets: int = Field(default=100, ge=1)


class TruncationParams(_Params):
    n: Optional[int] = Field(default=None, ge=1)
    N: int = Field(default=8, ge=1)
    k: float = Field(default=1.0, gt=0, le=1)


def _flag(value: bool) -> str:
    return "true" if value else "false"


def _bool_verdict(check: str, expected: bool, measured: bool) -> Verdict:
    return Verdict(check, _flag(expected), _flag(measured), expected == measured)


def _threshold_verdict(check: str, value: float, bound: float) -> Verdict:
    return Verdict(check, f"<= {bound:.3g}", f"{value:.3e}", value <= bound)


def projection_instance(
    spec: AlgebraSpec,
    m: int,
    z: int,
    rng: np.random.Generator,
    tol: float = DEFAULT_TOL
) -> Tuple[SplineProblem, np.ndarray, Submodule]:
    """
    Random P = projection onto a submodule W, Z inside W^perp, Y = W + Z.

    Returns:
        (problem, projector, Z)
    """
    space = ModuleSpace(spec, m)
    W = submodule_from_generators(space, [space.random_vector(rng)])
    B = SesquilinearForm.from_flat(space, W.projector)
    complement = orthogonal_complement(W)
    z_generators = [
        unflatten(space, complement.projector @ flatten(space.random_vector(rng))) for _ in range(z)
    ]
    Z = submodule_from_generators(space, z_generators)
    Y = submodule_sum(W, Z)
    x = space.random_vector(rng)
    return SplineProblem(space, Y, B, x, tol), W.projector, Z


def _check_projection(problem: SplineProblem, P: np.ndarray, Z: Submodule) -> List[Verdict]:
    report = solve(problem)
    verdicts = [_bool_verdict("solvable", True, report.solvable)]
    if not report.solvable:
        return verdicts
    s = report.solution
    expected = unflatten(problem.space, flatten(problem.x) - P @ flatten(problem.x))
    verdicts.append(_threshold_verdict("residual", report.residual, max(problem.tol, report.threshold)))
    verdicts.append(_bool_verdict("s - (1-P)x in Z", True, Z.contains(s - expected, tol=1e-8)))
    verdicts.append(_bool_verdict("unique", Z.dim == 0, report.unique))
    verdicts.append(_bool_verdict("necessary condition", True, report.necessary_condition))
    if Z.dim:
        z = unflatten(problem.space, Z.basis[:, 0])
        second = s + z
        verdicts.append(_threshold_verdict(
            "second solution s + z residual", solution_residual(problem, second), 2 * report.threshold
        ))
        verdicts.append(_bool_verdict("s + z differs from s", True, not module_vectors_close(s, second, 1e-6)))
    return verdicts


def run_projection(params: ProjectionParams, settings: Settings) -> ExampleResult:
    if not params.is_random:
        spec = AlgebraSpec((1,))
        space = ModuleSpace(spec, 2)
        B = form_from_operator_rows(space, [[1, 0], [0, 0]])
        Y = submodule_from_generators(space, [space.basis_vector(0)])
        x = ModuleVector(space, [spec.scalar(1), spec.scalar(1)])
        problem = SplineProblem(space, Y, B, x, settings.tol)
        report = solve(problem)
        expected = ModuleVector(space, [spec.scalar(0), spec.scalar(1)])
        measured = "absent" if report.solution is None else str(np.round(flatten(report.solution).real, 12).tolist())
        verdicts = [
            _bool_verdict("solvable", True, report.solvable),
            Verdict(
                "s = (1-P)x", "[0.0, 1.0]", measured,
                report.solution is not None and module_vectors_close(report.solution, expected, 1e-12),
            ),
            _bool_verdict("unique", True, report.unique),
            _bool_verdict("necessary condition", True, report.necessary_condition),
        ]
        return ExampleResult("projection", "B(x, y) = <P x, y>, Y = ran P over C^2", verdicts, report)

    seed = params.seed if params.seed is not None else settings.seed
    spec = AlgebraSpec(tuple(params.blocks or (2, 1)))
    rng = np.random.default_rng(seed)
    problem, P, Z = projection_instance(spec, params.m, params.z, rng, settings.tol)
    verdicts = _check_projection(problem, P, Z)
    description = f"random projection over blocks {spec.block_sizes}, m={params.m}, dim Z={Z.dim}"
    return ExampleResult("projection", description, verdicts)


def run_remark(params: RemarkParams, settings: Settings) -> ExampleResult:
    spec = AlgebraSpec((1,))
    space = ModuleSpace(spec, 3)
    B = form_from_operator_rows(space, [[1, 0, 0], [0, 1, 0], [0, 0, 0]])
    Y = submodule_from_generators(space, [space.basis_vector(0)])
    x = ModuleVector(space, [spec.scalar(1)] * 3)
    problem = SplineProblem(space, Y, B, x, settings.tol)
    report = analyze(problem, AnalyzeOptions(seed=settings.seed, rcond=settings.rcond))

    rng = np.random.default_rng(settings.seed)
    sampled = [solve(problem.with_target(space.random_vector(rng))).solvable for _ in range(params.targets)]
    expected = ModuleVector(space, [spec.scalar(0), spec.scalar(1), spec.scalar(1)])
    contained = operator_range_contained(B, Y)

    verdicts = [
        _bool_verdict("solvable", True, report.solvable),
        Verdict(
            "s", "[0.0, 1.0, 1.0]",
            "absent" if report.solution is None else str(np.round(flatten(report.solution).real, 12).tolist()),
            report.solution is not None and module_vectors_close(report.solution, expected, 1e-12),
        ),
        _threshold_verdict("residual", report.residual, settings.tol),
        _bool_verdict("unique", True, report.unique),
        _bool_verdict("necessary condition", True, report.necessary_condition),
        _bool_verdict(f"solvable for {params.targets} sampled targets", True, all(sampled)),
        _bool_verdict("solvable for every target", True, bool(report.all_targets_solvable)),
        _bool_verdict("T(X) contained in T(Y)", False, contained),
    ]
    return ExampleResult("remark", "T = diag(1,1,0), Y = ran diag(1,0,0) over C^3", verdicts, report)


def run_abelian(params: AbelianParams, settings: Settings) -> ExampleResult:
    spec = AlgebraSpec((1, 1))
    space = ModuleSpace(spec, 1)
    e1 = AlgebraElement(spec, [np.ones((1, 1)), np.zeros((1, 1))])
    B = SesquilinearForm(space, [[e1]])
    Y = submodule_from_generators(space, [ModuleVector(space, [e1])])
    x = ModuleVector(space, [spec.identity()])
    problem = SplineProblem(space, Y, B, x, settings.tol)
    options = AnalyzeOptions(
        coercivity=True,
        k_grid=(1.0,),
        states_per_block=settings.states,
        targets=settings.targets,
        candidates=settings.candidates,
        seed=settings.seed,
        rcond=settings.rcond,
    )
    report = analyze(problem, options)

    rng = np.random.default_rng(settings.seed)
    residuals = []
    for _ in range(params.targets):
        sampled = solve(problem.with_target(space.random_vector(rng)))
        residuals.append(sampled.residual if sampled.solvable else np.inf)
    worst = max(residuals)

    states = pure_state_grid(spec, 1, settings.seed)
    a, b = spec.random_element(rng), spec.random_element(rng)
    multiplicative = all(
        abs(evaluate(f, mul(a, b)) - evaluate(f, a) * evaluate(f, b)) <= 1e-12 * (1 + abs(evaluate(f, a) * evaluate(f, b)))
        for f in states
    )
    c_hat = report.coercivity.c_hat(1.0)

    verdicts = [
        _bool_verdict("pure states multiplicative", True, multiplicative),
        Verdict("right radical dim", "0", str(report.radical_dims[0]), report.radical_dims[0] == 0),
        _bool_verdict("positive on Y", True, report.positive_on_Y),
        _bool_verdict("solvable", True, report.solvable),
        _bool_verdict("unique", True, report.unique),
        _bool_verdict("necessary condition", True, report.necessary_condition),
        _threshold_verdict(f"worst residual over {params.targets} targets", worst, 1e-9),
        Verdict("c_hat(1)", "1 +/- 1e-6", f"{c_hat:.9f}", abs(c_hat - 1.0) <= 1e-6),
    ]
    return ExampleResult("abelian", "A = C + C, Y = C + 0, B(u, v) = (conj(u1) v1, 0)", verdicts, report)


def run_truncation(params: TruncationParams, settings: Settings) -> ExampleResult:
    n = params.n if params.n is not None else 2 * params.N + 2
    family = truncated_counterexample(n, params.N)
    ratios = family.designated_ratios(params.k, n_candidates=settings.candidates, seed=settings.seed)

    table = []
    verdicts = [Verdict("right radical dim", "0", str(family.right_radical_dim()), family.right_radical_dim() == 0)]
    for j, ratio in enumerate(ratios, start=1):
        bound = (1.0 / (2 * j)) ** 2
        table.append({"j": j, "ratio": ratio, "bound": bound})
        verdicts.append(_threshold_verdict(f"ratio at j={j}", ratio, bound + 1e-9))
    decreasing = all(later < earlier for earlier, later in zip(ratios, ratios[1:]))
    verdicts.append(_bool_verdict("ratios strictly decreasing", True, decreasing))
    description = f"truncated l2 family over M_{n}, N={params.N}, k={params.k}"
    return ExampleResult("l2-truncation", description, verdicts, table=table)


EXAMPLES: Dict[str, tuple] = {
    "projection": (ProjectionParams, run_projection),
    "remark": (RemarkParams, run_remark),
    "abelian": (AbelianParams, run_abelian),
    "l2-truncation": (TruncationParams, run_truncation),
}


def run_example(name: str, params: Optional[Dict[str, str]] = None, settings: Optional[Settings] = None) -> ExampleResult:
    """
    Build and check a catalog example.

    Args:
        name: One of EXAMPLES
        params: key=value parameters, validated per example
        settings: Effective settings (tolerance, seed, sampling sizes)

    Returns:
        ExampleResult with expected-vs-measured verdicts
    """
    if name not in EXAMPLES:
        raise ValidationError(f"Unknown example '{name}' (choose from {', '.join(EXAMPLES)})")
    model, runner = EXAMPLES[name]
    try:
        parsed = model(**(params or {}))
    except PydanticValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(part) for part in first["loc"])
        raise ValidationError(f"Invalid parameter for '{name}': {where}: {first['msg']}")
    result = runner(parsed, settings or Settings())
    logger.debug("example %s: %d verdicts, ok=%s", name, len(result.verdicts), result.ok)
    return result
