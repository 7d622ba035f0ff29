#!/usr/bin/env python3
"""
cspline CLI Interface

Main command line interface for the cspline tool.

Exit codes: 0 solvable (or every example verdict matched), 2 not solvable
(or a verdict mismatched), 1 on any error.
"""

import logging
import sys
from typing import Callable, Dict, List, Optional

import click
from rich.console import Console
from rich.logging import RichHandler

from . import __version__
from .config import ConfigManager
from .core import SplineCore
from .exceptions import ConfigurationError, CSplineError, ParseError

console = Console()
err_console = Console(stderr=True)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNSOLVABLE = 2


def _configure_logging(verbose: bool) -> None:
    if not verbose:
        return
    logging.basicConfig(
        level=logging.DEBUG,
        format="%(message)s",
        handlers=[RichHandler(console=err_console, show_path=False)],
        force=True,
    )


def _parse_params(items: List[str]) -> Dict[str, str]:
    params = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise click.BadParameter(f"expected key=value, got '{item}'", param_hint="PARAMS")
        params[key.strip()] = value.strip()
    return params


def _run(verbose: bool, action: Callable[[], int]) -> int:
    """Run ``action`` and map failures to exit code 1."""
    try:
        return action()
    except ParseError as e:
        err_console.print(f"[red]Problem file error: {e}[/red]")
    except ConfigurationError as e:
        err_console.print(f"[red]Configuration error: {e}[/red]")
    except CSplineError as e:
        err_console.print(f"[red]Error: {e}[/red]")
    except click.ClickException as e:
        err_console.print(f"[red]Error: {e.format_message()}[/red]")
    except KeyboardInterrupt:
        err_console.print("\n[yellow]Operation cancelled by user.[/yellow]")
    except Exception as e:
        err_console.print(f"[red]Unexpected error: {e}[/red]")
        if verbose:
            err_console.print_exception()
    return EXIT_ERROR


def common_options(func):
    func = click.option('--verbose', '-v', is_flag=True, help='Enable verbose output')(func)
    func = click.option('--json', 'json_output', is_flag=True, help='Emit a JSON report')(func)
    func = click.option('--seed', type=int, default=None, help='Random seed (default 0)')(func)
    func = click.option('--tol', type=float, default=None, help='Tolerance (default 1e-9)')(func)
    return func


@click.group()
@click.version_option(__version__, prog_name="cspline")
def cli() -> None:
    """
    cspline - B-spline interpolation in Hilbert C*-modules.

    Usage:
        cspline solve problem.json                # Solve one problem
        cspline analyze problem.json --coercivity # Every check plus c_hat(k)
        cspline example l2-truncation N=8         # Built-in worked example
    """


@cli.command()
@click.argument('path', type=click.Path())
@common_options
@click.pass_context
def solve(
    ctx: click.Context,
    path: str,
    tol: Optional[float],
    seed: Optional[int],
    json_output: bool,
    verbose: bool
) -> None:
    """Solve the spline problem in PATH."""
    _configure_logging(verbose)

    def action() -> int:
        core = SplineCore(verbose=verbose, json_output=json_output)
        report = core.solve_file(path, tol=tol, seed=seed)
        return EXIT_OK if report.solvable else EXIT_UNSOLVABLE

    ctx.exit(_run(verbose, action))


@cli.command()
@click.argument('path', type=click.Path())
@common_options
@click.option('--coercivity', is_flag=True, help='Estimate coercivity constants c_hat(k)')
@click.option('--k-grid', default=None, help='Comma-separated k values in (0, 1] (default 1.0)')
@click.option('--states', type=int, default=None, help='Pure states per block (default 64)')
@click.option('--targets', type=int, default=None, help='Targets per state (default 64)')
@click.option('--workers', type=int, default=None, help='Threads for the coercivity estimator')
@click.pass_context
def analyze(
    ctx: click.Context,
    path: str,
    tol: Optional[float],
    seed: Optional[int],
    json_output: bool,
    verbose: bool,
    coercivity: bool,
    k_grid: Optional[str],
    states: Optional[int],
    targets: Optional[int],
    workers: Optional[int]
) -> None:
    """Run every check on the spline problem in PATH."""
    _configure_logging(verbose)

    def action() -> int:
        core = SplineCore(
            verbose=verbose,
            json_output=json_output,
            k_grid=k_grid,
            states=states,
            targets=targets,
        )
        report = core.analyze_file(path, tol=tol, seed=seed, coercivity=coercivity, max_workers=workers)
        return EXIT_OK if report.solvable else EXIT_UNSOLVABLE

    ctx.exit(_run(verbose, action))


@cli.command()
@click.argument('name')
@click.argument('params', nargs=-1)
@common_options
@click.option('--states', type=int, default=None, help='Pure states per block (default 64)')
@click.option('--targets', type=int, default=None, help='Targets per state (default 64)')
@click.pass_context
def example(
    ctx: click.Context,
    name: str,
    params: tuple,
    tol: Optional[float],
    seed: Optional[int],
    json_output: bool,
    verbose: bool,
    states: Optional[int],
    targets: Optional[int]
) -> None:
    """
    Run a built-in example: projection, remark, abelian or l2-truncation.

    PARAMS are key=value pairs, e.g. N=8 or seed=3 blocks=2,1 z=1.
    """
    _configure_logging(verbose)

    def action() -> int:
        core = SplineCore(verbose=verbose, json_output=json_output, states=states, targets=targets)
        result = core.run_example(name, _parse_params(list(params)), tol=tol, seed=seed)
        return EXIT_OK if result.ok else EXIT_UNSOLVABLE

    ctx.exit(_run(verbose, action))


@cli.command()
@click.option('--json', 'json_output', is_flag=True, help='Emit settings as JSON')
@click.option('--set', 'assignments', multiple=True, help='Save key=value to the config file')
@click.option('--verbose', '-v', is_flag=True, help='Enable verbose output')
@click.pass_context
def config(ctx: click.Context, json_output: bool, assignments: tuple, verbose: bool) -> None:
    """Show the effective configuration."""
    _configure_logging(verbose)

    def action() -> int:
        manager = ConfigManager()
        if assignments:
            manager.set_values(_parse_params(list(assignments)))
            console.print(f"[green]✓ Saved {manager.config_file}[/green]")
        settings = manager.get_settings()
        if json_output:
            console.out(settings.model_dump_json(indent=2), highlight=False)
        else:
            manager.show_config(settings)
        return EXIT_OK

    ctx.exit(_run(verbose, action))


def main(argv: Optional[List[str]] = None) -> None:
    """Console-script entry point; usage errors exit 1 instead of click's 2."""
    try:
        code = cli.main(args=argv, prog_name="cspline", standalone_mode=False)
    except click.exceptions.Abort:
        err_console.print("\n[yellow]Operation cancelled by user.[/yellow]")
        code = EXIT_ERROR
    except click.ClickException as e:
        e.show()
        code = EXIT_ERROR
    sys.exit(code if isinstance(code, int) else EXIT_OK)


if __name__ == '__main__':
    main()
