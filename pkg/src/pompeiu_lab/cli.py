"""CLI for Pompeiu Lab."""

import logging
import math
import os
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Annotated

import numpy as np
import typer
import yaml
from dotenv import load_dotenv
from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.table import Table

from .asymptotics import compare_asymptotics
from .bvp import disc_overdetermined, residual_check, scan_trefftz, trefftz_defect
from .errors import ConvergenceError, PreconditionError
from .models import (
    Command,
    LabConfig,
    OutputFormat,
    PompeiuParams,
    RunConfig,
    Severity,
    worst_severity,
)
from .pompeiu import direction_sweep, fit_moments, moment, pompeiu_integral
from .reports import (
    ReportTable,
    comparison_table,
    direction_table,
    extraction_table,
    moment_table,
    scan_table,
    trace_table,
    zero_table,
)
from .search import minimize_defect
from .shapes import RigidMotion, StarShape, dump_shape, load_shape
from .special import bessel_j1_zero, j1_zeros

load_dotenv()

app = typer.Typer(
    name="pompeiu-lab",
    help="Numerical experiments on the Pompeiu problem for planar star-shaped domains.",
    no_args_is_help=True,
)
console = Console(stderr=True)

SEVERITY_COLORS = {
    Severity.OK: "green",
    Severity.INFO: "blue",
    Severity.WARNING: "yellow",
    Severity.CRITICAL: "red",
}

EXIT_CODES = {
    Severity.OK: 0,
    Severity.INFO: 0,
    Severity.WARNING: 0,
    Severity.CRITICAL: 3,
}
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

ShapeOption = Annotated[
    Path | None, typer.Option("--shape", "-s", help="Shape JSON file")
]
KOption = Annotated[
    str, typer.Option("--k", "-k", help="Wavenumber, or 'auto' for j_1,1 / mean_radius")
]
TolOption = Annotated[
    float | None, typer.Option("--tol", help="Quadrature tolerance (default from config)")
]
OutputOption = Annotated[
    Path | None, typer.Option("--output", "-o", help="Report file (defaults to stdout)")
]
FormatOption = Annotated[OutputFormat, typer.Option("--format", "-f", help="Report format")]
ConfigOption = Annotated[
    Path | None, typer.Option("--config", help="Path to YAML config file")
]


def load_config(config_path: Path | None) -> LabConfig:
    """Load configuration from YAML file or env var."""
    if config_path is None:
        env_config = os.getenv("POMPEIU_LAB_CONFIG")
        if env_config:
            config_path = Path(env_config)

    if config_path is None:
        return LabConfig.defaults()
    if not config_path.exists():
        console.print(f"[yellow]Warning: config {config_path} not found, using defaults[/yellow]")
        return LabConfig.defaults()

    try:
        with open(config_path) as f:
            data = yaml.safe_load(f)
        return LabConfig.model_validate(data or {})
    except (yaml.YAMLError, ValidationError) as e:
        console.print(f"[yellow]Warning: Could not load config: {e}[/yellow]")
        return LabConfig.defaults()


@app.callback()
def main(
    verbose: Annotated[
        bool, typer.Option("--verbose", "-v", help="Log quadrature and optimizer progress")
    ] = False,
):
    """Numerical experiments on the Pompeiu problem for planar star-shaped domains."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=console, show_path=False, show_time=False)],
        force=True,
    )


def _fail(code: int, title: str, message: str) -> None:
    console.print(Panel(f"[red]{message}[/red]", title=title))
    raise typer.Exit(code)


@contextmanager
def _numerics() -> Iterator[None]:
    try:
        yield
    except PreconditionError as e:
        _fail(EXIT_VALIDATION, "Precondition violated", str(e))
    except ConvergenceError as e:
        detail = f" (last estimate {e.estimate:.3e})" if e.estimate is not None else ""
        _fail(EXIT_NUMERICAL, "Numerical non-convergence", f"{e}{detail}")


def _prepare(
    command: Command,
    shape_path: Path | None,
    k: str,
    tol: float | None,
    output: Path | None,
    output_format: OutputFormat,
    lab: LabConfig,
    options: dict,
    *,
    needs_shape: bool = True,
) -> tuple[RunConfig, StarShape | None, PompeiuParams | None]:
    if needs_shape and shape_path is None:
        _fail(EXIT_VALIDATION, "Invalid configuration", "--shape is required")
    try:
        run = RunConfig(
            command=command,
            shape_path=shape_path,
            k=k,
            tol=lab.quadrature.tol if tol is None else tol,
            output_path=output,
            output_format=output_format,
            options=options,
        )
    except ValidationError as e:
        messages = "\n".join(
            f"{'.'.join(map(str, err['loc']))}: {err['msg']}" for err in e.errors()
        )
        _fail(EXIT_VALIDATION, "Invalid configuration", messages)

    if not needs_shape:
        return run, None, None
    with _numerics():
        shape = load_shape(run.shape_path)
    wavenumber = bessel_j1_zero(1).value / shape.mean_radius if run.k == "auto" else run.k
    run.options["k_resolved"] = wavenumber
    return run, shape, PompeiuParams(k=wavenumber, tol=run.tol)


def _emit(table: ReportTable, run: RunConfig) -> None:
    text = table.write(run.output_path, run.output_format)
    if run.output_path is None:
        typer.echo(text, nl=False)
    else:
        console.print(f"[green]Report saved to {run.output_path}[/green]")


def _parse_indices(text: str) -> list[int]:
    """'0..20' or '0,2,5' to a list of ints."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            return list(range(int(lo), int(hi) + 1))
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        _fail(EXIT_VALIDATION, "Invalid configuration", f"cannot parse index list {text!r}")


@app.command()
def ft(
    shape: ShapeOption = None,
    k: KOption = "auto",
    tol: TolOption = None,
    dirs: Annotated[int, typer.Option("--dirs", min=1, help="Number of real directions")] = 64,
    output: OutputOption = None,
    output_format: FormatOption = OutputFormat.CSV,
    config: ConfigOption = None,
):
    """Indicator transform of the shape over equally spaced real directions."""
    lab = load_config(config)
    run, star, params = _prepare(
        Command.FT, shape, k, tol, output, output_format, lab, {"dirs": dirs}
    )
    with _numerics():
        samples = direction_sweep(star, params, dirs)
    largest = max(abs(s.value) for s in samples)
    console.print(f"k = {params.k:.15g}: max |transform| over {dirs} directions = {largest:.3e}")
    _emit(direction_table(samples, run.header()), run)


@app.command()
def pompeiu(
    shape: ShapeOption = None,
    k: KOption = "auto",
    tol: TolOption = None,
    motions: Annotated[int, typer.Option("--motions", min=1, help="Number of rigid motions")] = 20,
    seed: Annotated[int, typer.Option("--seed", help="Random seed for motions")] = 0,
    output: OutputOption = None,
    output_format: FormatOption = OutputFormat.CSV,
    config: ConfigOption = None,
):
    """Integrals of exp(i k beta.x) over randomly moved copies of the shape."""
    lab = load_config(config)
    run, star, params = _prepare(
        Command.POMPEIU, shape, k, tol, output, output_format, lab,
        {"motions": motions, "seed": seed},
    )
    rng = np.random.default_rng(seed)
    table = ReportTable(
        "pompeiu_integral",
        ["index", "rotation", "tx", "ty", "beta_x", "beta_y", "re", "im", "abs"],
        header=run.header(),
    )
    with _numerics():
        for index in range(motions):
            rotation = float(rng.uniform(0.0, 2.0 * math.pi))
            tx, ty = (float(v) for v in rng.uniform(-1.0, 1.0, size=2))
            angle = float(rng.uniform(0.0, 2.0 * math.pi))
            beta = (math.cos(angle), math.sin(angle))
            motion = RigidMotion(rotation=rotation, translation=(tx, ty))
            value = pompeiu_integral(star, params, beta, motion)
            table.add_row(index, rotation, tx, ty, *beta, value.real, value.imag, abs(value))
    _emit(table, run)


@app.command()
def moments(
    shape: ShapeOption = None,
    k: KOption = "auto",
    tol: TolOption = None,
    j: Annotated[str, typer.Option("--j", help="Indices, e.g. 0..20 or 0,4,8")] = "0..20",
    output: OutputOption = None,
    output_format: FormatOption = OutputFormat.CSV,
    config: ConfigOption = None,
):
    """Boundary moments I_j, log-scaled beyond j = 20."""
    lab = load_config(config)
    indices = _parse_indices(j)
    run, star, params = _prepare(
        Command.MOMENTS, shape, k, tol, output, output_format, lab, {"j": j}
    )
    with _numerics():
        reports = [moment(star, params, index) for index in indices]
    _emit(moment_table(reports, run.header()), run)


@app.command()
def extract(
    shape: ShapeOption = None,
    k: KOption = "auto",
    tol: TolOption = None,
    j_max: Annotated[int, typer.Option("--j-max", help="Highest moment to recover")] = 1,
    output: OutputOption = None,
    output_format: FormatOption = OutputFormat.CSV,
    config: ConfigOption = None,
):
    """Recover I_0..I_jmax from the large-A behaviour of the weighted integral."""
    lab = load_config(config)
    grid_config = lab.extraction
    run, star, params = _prepare(
        Command.EXTRACT, shape, k, tol, output, output_format, lab,
        {"j_max": j_max, **grid_config.model_dump()},
    )
    grid = np.geomspace(grid_config.a_min, grid_config.a_max, grid_config.points)
    with _numerics():
        fit = fit_moments(star, params, j_max, grid, nuisance_terms=grid_config.nuisance_terms)
        direct = [moment(star, params, index) for index in range(j_max + 1)]
    console.print(f"fit condition {fit.condition:.3g}, residual {fit.residual:.3e}")
    _emit(extraction_table(fit, direct, run.header()), run)


@app.command()
def asympt(
    shape: ShapeOption = None,
    k: KOption = "auto",
    tol: TolOption = None,
    m: Annotated[
        str | None, typer.Option("--m", help="Comma-separated m values (default from config)")
    ] = None,
    output: OutputOption = None,
    output_format: FormatOption = OutputFormat.CSV,
    config: ConfigOption = None,
):
    """Compare direct I_2m with the Laplace-method main terms."""
    lab = load_config(config)
    m_values = _parse_indices(m) if m else lab.asymptotics.m_values
    run, star, params = _prepare(
        Command.ASYMPT, shape, k, tol, output, output_format, lab, {"m": m_values}
    )
    with _numerics():
        comparison = compare_asymptotics(star, params, m_values)

    maxima = Table(title="Global maximizers of Psi")
    maxima.add_column("phi*")
    maxima.add_column("Psi*")
    maxima.add_column("gamma")
    for point in comparison.maximizers:
        maxima.add_row(f"{point.phi:.12g}", f"{point.psi_value:.12g}", f"{point.gamma:.12g}")
    console.print(maxima)
    console.print(
        f"stated/re-derived main-term factor: {comparison.discrepancy_factor:.6g}; "
        f"|ratio| change over the last two m: {comparison.stated_ratio_variation:.3%}"
    )
    for diagnostic in comparison.diagnostics:
        color = SEVERITY_COLORS[diagnostic.severity]
        console.print(f"[{color}]{diagnostic.name}: {diagnostic.message}[/{color}]")
    _emit(comparison_table(comparison, run.header()), run)
    raise typer.Exit(EXIT_CODES[worst_severity(comparison.diagnostics)])


@app.command()
def bvp(
    shape: ShapeOption = None,
    k: KOption = "auto",
    tol: TolOption = None,
    grid_step: Annotated[
        float, typer.Option("--grid-step", help="Finite-difference step for the disc check")
    ] = 1e-3,
    output: OutputOption = None,
    output_format: FormatOption = OutputFormat.CSV,
    config: ConfigOption = None,
):
    """Overdetermined Helmholtz problem: closed form on discs, Trefftz fit otherwise."""
    lab = load_config(config)
    run, star, params = _prepare(
        Command.BVP, shape, k, tol, output, output_format, lab,
        {"grid_step": grid_step, **lab.trefftz.model_dump()},
    )
    table = ReportTable(
        "overdetermined_bvp",
        [
            "method", "k", "boundary_residual", "neumann_defect", "pde_residual", "condition",
            "status",
        ],
        header=run.header(),
    )
    with _numerics():
        if star.is_disc:
            closed = disc_overdetermined(star.mean_radius, params.k)
            boundary = abs(float(closed.solution.value(star.mean_radius)))
            pde = residual_check(closed.solution, grid_step)
            table.add_row(
                "closed_form", params.k, boundary, closed.neumann_defect, pde, math.nan,
                Severity.OK,
            )
        solution = trefftz_defect(
            star,
            params.k,
            lab.trefftz.order,
            lab.trefftz.collocation,
            dirichlet_tol=lab.trefftz.dirichlet_tol,
            rcond=lab.trefftz.rcond,
            column_tol=lab.trefftz.column_tol,
        )
    table.add_row(
        "trefftz", params.k, solution.boundary_residual, solution.neumann_defect, math.nan,
        solution.condition, solution.severity,
    )
    color = SEVERITY_COLORS[solution.severity]
    console.print(f"[{color}]{solution.message}[/{color}]")
    _emit(table, run)
    raise typer.Exit(EXIT_CODES[solution.severity])


@app.command()
def scan(
    shape: ShapeOption = None,
    k: KOption = "auto",
    tol: TolOption = None,
    width: Annotated[float, typer.Option("--width", help="Scan k over centre +- width")] = 0.5,
    points: Annotated[int, typer.Option("--points", min=1, help="Number of k values")] = 21,
    output: OutputOption = None,
    output_format: FormatOption = OutputFormat.CSV,
    config: ConfigOption = None,
):
    """Trefftz Neumann defect over a wavenumber window."""
    lab = load_config(config)
    run, star, params = _prepare(
        Command.SCAN, shape, k, tol, output, output_format, lab,
        {"width": width, "points": points, **lab.trefftz.model_dump()},
    )
    k_values = np.linspace(params.k - width, params.k + width, points)
    if k_values[0] <= 0:
        _fail(EXIT_VALIDATION, "Invalid configuration", "scan window reaches k <= 0")
    with _numerics():
        solutions = scan_trefftz(star, k_values, lab.trefftz)
    best = min(solutions, key=lambda s: s.neumann_defect)
    console.print(f"min Neumann defect {best.neumann_defect:.3e} at k = {best.k:.12g}")
    failed = [s for s in solutions if s.severity == Severity.CRITICAL]
    if failed:
        console.print(
            f"[yellow]{len(failed)} of {len(solutions)} fits failed the Dirichlet check[/yellow]"
        )
    _emit(scan_table(solutions, run.header()), run)


@app.command()
def search(
    shape: ShapeOption = None,
    k: KOption = "auto",
    tol: TolOption = None,
    max_order: Annotated[int | None, typer.Option("--max-order", help="Highest harmonic")] = None,
    budget: Annotated[int | None, typer.Option("--budget", help="Objective evaluations")] = None,
    final_shape: Annotated[
        Path | None, typer.Option("--final-shape", help="Write the best shape here")
    ] = None,
    output: OutputOption = None,
    output_format: FormatOption = OutputFormat.CSV,
    config: ConfigOption = None,
):
    """Minimize the direction-averaged defect over coefficients and k."""
    lab = load_config(config)
    order = lab.search.max_order if max_order is None else max_order
    evaluations = lab.search.budget if budget is None else budget
    run, star, params = _prepare(
        Command.SEARCH, shape, k, tol, output, output_format, lab,
        {"max_order": order, "budget": evaluations},
    )
    with _numerics():
        report = minimize_defect(
            star, params.k, order, evaluations, tol=params.tol, config=lab.search
        )
    console.print(
        f"defect {report.defect:.3e} at k = {report.k:.12g} after {report.evaluations} "
        f"evaluations ({report.accepted_steps} accepted steps): {report.message}"
    )
    run.options["gauge_rotation"] = report.rotation
    if final_shape is not None:
        dump_shape(report.shape, final_shape)
    _emit(trace_table(report, order, run.header()), run)
    raise typer.Exit(0 if report.converged else EXIT_NUMERICAL)


@app.command()
def zeros(
    count: Annotated[int, typer.Option("--count", min=1, max=50, help="Number of J_1 zeros")] = 10,
    output: OutputOption = None,
    output_format: FormatOption = OutputFormat.CSV,
    config: ConfigOption = None,
):
    """Table of the first positive zeros of J_1."""
    lab = load_config(config)
    run, _, _ = _prepare(
        Command.ZEROS, None, "auto", None, output, output_format, lab, {"count": count},
        needs_shape=False,
    )
    with _numerics():
        table = zero_table(j1_zeros(count), run.header())
    _emit(table, run)


if __name__ == "__main__":
    app()
