"""
cspline Core Module

Main driver: loads settings and problem files, runs the solver, the
analyzer and the example catalog, and hands results to the renderer.
"""

import logging
from pathlib import Path
from typing import Dict, Optional, Union

from rich.console import Console
from rich.progress import Progress, SpinnerColumn, TextColumn

from .catalog import ExampleResult, run_example
from .config import ConfigManager, Settings
from .output import ReportRenderer
from .problem import build_problem, load_problem_file
from .spline import AnalyzeOptions, SplineReport, analyze, solve

console = Console()
logger = logging.getLogger(__name__)


class SplineCore:
    """
    Core cspline functionality for solving and analyzing spline problems.
    """

    def __init__(
        self,
        verbose: bool = False,
        json_output: bool = False,
        config_dir: Optional[Path] = None,
        **overrides
    ):
        """
        Initialize cspline core.

        Args:
            verbose: Enable verbose output
            json_output: Emit JSON documents instead of rich tables
            config_dir: Override the configuration directory
            **overrides: Settings overrides from command-line flags
        """
        self.verbose = verbose
        self.json_output = json_output

        self.config_manager = ConfigManager(config_dir)
        self.settings: Settings = self.config_manager.get_settings(**overrides)
        self.renderer = ReportRenderer(json_output=json_output)

    def _seed(self, flag: Optional[int], file_seed: Optional[int]) -> int:
        if flag is not None:
            return flag
        if file_seed is not None:
            return file_seed
        return self.settings.seed

    def solve_file(
        self,
        path: Union[str, Path],
        tol: Optional[float] = None,
        seed: Optional[int] = None
    ) -> SplineReport:
        """
        Solve the problem stored at ``path`` and render the report.

        Args:
            path: Problem file
            tol: Tolerance flag; beats the file's options.tol and the settings
            seed: Seed flag recorded in the report; beats the file's options.seed and the settings

        Returns:
            The SplineReport
        """
        model = load_problem_file(path)
        problem = build_problem(model, tol or model.options.tol or self.settings.tol)

        if self.verbose:
            console.print(f"[blue]Solving {path} (D = {problem.space.flat_dim})[/blue]")

        report = solve(problem, self.settings.rcond)
        self.renderer.render_report(problem, report, "solve", self._seed(seed, model.options.seed))
        return report

    def analyze_file(
        self,
        path: Union[str, Path],
        tol: Optional[float] = None,
        seed: Optional[int] = None,
        coercivity: bool = False,
        max_workers: Optional[int] = None
    ) -> SplineReport:
        """
        Run every checker on the problem stored at ``path``.

        Args:
            path: Problem file
            tol: Tolerance flag
            seed: Seed flag for the coercivity sampler
            coercivity: Estimate coercivity constants over settings.k_grid
            max_workers: Thread pool size for the estimator

        Returns:
            The SplineReport, with a CoercivityTable when requested
        """
        model = load_problem_file(path)
        problem = build_problem(model, tol or model.options.tol or self.settings.tol)
        effective_seed = self._seed(seed, model.options.seed)
        options = AnalyzeOptions(
            coercivity=coercivity,
            k_grid=tuple(self.settings.k_grid),
            states_per_block=self.settings.states,
            targets=self.settings.targets,
            candidates=self.settings.candidates,
            seed=effective_seed,
            max_workers=max_workers,
            rcond=self.settings.rcond,
        )

        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            console=console,
            transient=True,
            disable=self.json_output,
        ) as progress:
            progress.add_task("Analyzing spline problem...", total=None)
            report = analyze(problem, options)

        if self.verbose:
            console.print("[green]✓ Analysis complete[/green]")

        self.renderer.render_report(problem, report, "analyze", effective_seed)
        return report

    def run_example(
        self,
        name: str,
        params: Optional[Dict[str, str]] = None,
        tol: Optional[float] = None,
        seed: Optional[int] = None
    ) -> ExampleResult:
        """Build, check and render a catalog example."""
        settings = self.settings.model_copy(update={
            key: value for key, value in {"tol": tol, "seed": seed}.items() if value is not None
        })
        logger.debug("running example %s with %s", name, params)

        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            console=console,
            transient=True,
            disable=self.json_output,
        ) as progress:
            progress.add_task(f"Running example {name}...", total=None)
            result = run_example(name, params, settings)

        self.renderer.render_example(result)
        return result
