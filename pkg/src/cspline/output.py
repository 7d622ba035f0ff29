"""
cspline Output Generator

Renders spline reports and example verdicts to the console, and builds the
machine-readable JSON documents emitted with --json.
"""

import math
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel
from pydantic import ValidationError as PydanticValidationError
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from . import __version__
from .algebra import AlgebraElement
from .catalog import ExampleResult
from .exceptions import OutputError
from .hilbert_module import ModuleVector
from .localization import CoercivityTable
from .problem import ProblemFile, VectorData, serialize_problem, vector_data
from .spline import SplineProblem, SplineReport

console = Console()

# Human output lists solutions entry by entry only up to this flat dimension
MAX_DISPLAY_DIM = 64


class CoercivityRowDocument(BaseModel):
    k: float
    c_hat: Optional[float]
    witnesses: int
    uncovered: int


class CoercivityDocument(BaseModel):
    rows: List[CoercivityRowDocument]
    states: int
    targets: int
    candidates: int
    seed: int
    notes: List[str]


class ReportBody(BaseModel):
    solvable: bool
    solution: Optional[VectorData]
    residual: float
    threshold: float
    unique: bool
    radical_dims: Tuple[int, int]
    necessary_condition: bool
    positive_on_Y: bool
    all_targets_solvable: Optional[bool] = None
    closed_range_note: Optional[str] = None
    ellipticity: Optional[float] = None
    diagnostics: List[str]


class ReportDocument(BaseModel):
    """JSON report of ``cspline solve`` and ``cspline analyze``."""

    kind: Literal["solve", "analyze"]
    version: str
    problem: ProblemFile
    report: ReportBody
    coercivity: Optional[CoercivityDocument] = None


class VerdictDocument(BaseModel):
    check: str
    expected: str
    measured: str
    ok: bool


class ExampleDocument(BaseModel):
    """JSON report of ``cspline example``."""

    kind: Literal["example"]
    version: str
    name: str
    description: str
    ok: bool
    verdicts: List[VerdictDocument]
    table: List[Dict[str, float]]
    report: Optional[ReportBody] = None


def _finite_or_none(value: Optional[float]) -> Optional[float]:
    if value is None or not math.isfinite(value):
        return None
    return float(value)


def _coercivity_document(table: CoercivityTable) -> CoercivityDocument:
    return CoercivityDocument(
        rows=[
            CoercivityRowDocument(
                k=row.k, c_hat=_finite_or_none(row.c_hat), witnesses=row.witnesses, uncovered=row.uncovered
            )
            for row in table.rows
        ],
        states=table.states,
        targets=table.targets,
        candidates=table.candidates,
        seed=table.seed,
        notes=list(table.notes),
    )


def _report_body(report: SplineReport) -> ReportBody:
    return ReportBody(
        solvable=report.solvable,
        solution=vector_data(report.solution) if report.solution is not None else None,
        residual=report.residual,
        threshold=report.threshold,
        unique=report.unique,
        radical_dims=report.radical_dims,
        necessary_condition=report.necessary_condition,
        positive_on_Y=report.positive_on_Y,
        all_targets_solvable=report.all_targets_solvable,
        closed_range_note=report.closed_range_note,
        ellipticity=_finite_or_none(report.ellipticity),
        diagnostics=list(report.diagnostics),
    )


def report_document(
    problem: SplineProblem,
    report: SplineReport,
    kind: str = "solve",
    seed: Optional[int] = None
) -> ReportDocument:
    """Build the JSON document; its ``problem`` member re-parses to ``problem``."""
    try:
        return ReportDocument(
            kind=kind,
            version=__version__,
            problem=ProblemFile.model_validate(serialize_problem(problem, seed)),
            report=_report_body(report),
            coercivity=_coercivity_document(report.coercivity) if report.coercivity else None,
        )
    except PydanticValidationError as e:
        raise OutputError(f"Failed to build report document: {e}")


def example_document(result: ExampleResult) -> ExampleDocument:
    try:
        return ExampleDocument(
            kind="example",
            version=__version__,
            name=result.name,
            description=result.description,
            ok=result.ok,
            verdicts=[VerdictDocument(**vars(v)) for v in result.verdicts],
            table=result.table,
            report=_report_body(result.report) if result.report else None,
        )
    except PydanticValidationError as e:
        raise OutputError(f"Failed to build example document: {e}")


def format_element(a: AlgebraElement) -> str:
    parts = []
    for block in a.blocks:
        if block.shape == (1, 1):
            parts.append(_format_scalar(block[0, 0]))
        else:
            parts.append(np.array2string(block, precision=6, suppress_small=True))
    return " + ".join(parts)


def _format_scalar(value: complex) -> str:
    if abs(value.imag) <= 1e-12:
        return f"{value.real:.6g}"
    return f"{value.real:.6g}{value.imag:+.6g}j"


def _flag(value: Optional[bool]) -> str:
    if value is None:
        return "[dim]n/a[/dim]"
    return "[green]yes[/green]" if value else "[red]no[/red]"


class ReportRenderer:
    """
    Renders reports either as rich panels and tables or as JSON.
    """

    def __init__(self, json_output: bool = False, out: Optional[Console] = None):
        """
        Initialize the renderer.

        Args:
            json_output: Emit one JSON document instead of rich output
            out: Console to write to (defaults to the module console)
        """
        self.json_output = json_output
        self.console = out or console

    def render_report(
        self,
        problem: SplineProblem,
        report: SplineReport,
        kind: str = "solve",
        seed: Optional[int] = None
    ) -> None:
        if self.json_output:
            document = report_document(problem, report, kind, seed)
            self.console.out(document.model_dump_json(indent=2), highlight=False)
            return

        status = "green" if report.solvable else "red"
        verdict = "SOLVABLE" if report.solvable else "NOT SOLVABLE"
        spec = problem.space.spec
        self.console.print(Panel(
            f"A = {' + '.join(f'M_{n}' for n in spec.block_sizes)}, m = {problem.space.rank}, "
            f"dim Y = {problem.Y.dim} (D = {problem.space.flat_dim}), tol = {problem.tol:g}",
            title=f"[{status}]Spline problem ({verdict})[/{status}]",
            border_style=status,
        ))

        table = Table(title="Checks")
        table.add_column("Check", style="cyan")
        table.add_column("Result")
        table.add_row("solvable", _flag(report.solvable))
        table.add_row("residual", f"{report.residual:.3e} (threshold {report.threshold:.3e})")
        table.add_row("unique", _flag(report.unique))
        table.add_row("radical dims (right, left)", str(report.radical_dims))
        table.add_row("necessary condition", _flag(report.necessary_condition))
        table.add_row("positive on Y", _flag(report.positive_on_Y))
        if kind == "analyze":
            table.add_row("solvable for every target", _flag(report.all_targets_solvable))
            if report.ellipticity is not None:
                table.add_row("ellipticity constant", f"{report.ellipticity:.6g}")
        self.console.print(table)

        if report.solution is not None:
            self._render_solution(report.solution)
        if report.coercivity is not None:
            self._render_coercivity(report.coercivity)
        if report.closed_range_note:
            self.console.print(f"[dim]{report.closed_range_note}[/dim]")
        if report.diagnostics:
            self.console.print(Panel(
                "\n".join(f"• {note}" for note in report.diagnostics),
                title="[blue]Diagnostics[/blue]",
                border_style="blue",
            ))

    def _render_solution(self, s: ModuleVector) -> None:
        if s.space.flat_dim > MAX_DISPLAY_DIM:
            self.console.print(f"[dim]Solution has D = {s.space.flat_dim}; use --json for its entries[/dim]")
            return
        table = Table(title="Spline s")
        table.add_column("Slot", style="cyan")
        table.add_column("Entry", style="green")
        for i, entry in enumerate(s.entries):
            table.add_row(str(i), format_element(entry))
        self.console.print(table)

    def _render_coercivity(self, coercivity: CoercivityTable) -> None:
        table = Table(title=f"Coercivity estimate ({coercivity.states} states, seed {coercivity.seed})")
        table.add_column("k", style="cyan")
        table.add_column("c_hat (estimate)", style="green")
        table.add_column("pairs")
        table.add_column("uncovered")
        for row in coercivity.rows:
            table.add_row(f"{row.k:g}", f"{row.c_hat:.9g}", str(row.witnesses), str(row.uncovered))
        self.console.print(table)
        for note in coercivity.notes:
            self.console.print(f"[yellow]{note}[/yellow]")

    def render_example(self, result: ExampleResult) -> None:
        if self.json_output:
            self.console.out(example_document(result).model_dump_json(indent=2), highlight=False)
            return

        status = "green" if result.ok else "red"
        self.console.print(Panel(
            result.description,
            title=f"[{status}]Example {result.name} ({'MATCH' if result.ok else 'MISMATCH'})[/{status}]",
            border_style=status,
        ))
        table = Table(title="Expected vs measured")
        table.add_column("Check", style="cyan")
        table.add_column("Expected")
        table.add_column("Measured")
        table.add_column("OK")
        for v in result.verdicts:
            table.add_row(v.check, v.expected, v.measured, "[green]✓[/green]" if v.ok else "[red]✗[/red]")
        self.console.print(table)

        if result.table:
            ratios = Table(title="Designated pair ratios")
            ratios.add_column("j", style="cyan")
            ratios.add_column("ratio", style="green")
            ratios.add_column("(1/2j)^2")
            for row in result.table:
                ratios.add_row(str(int(row["j"])), f"{row['ratio']:.6e}", f"{row['bound']:.6e}")
            self.console.print(ratios)
