#!/usr/bin/env python3

import functools
import pathlib
import sys
from typing import Any

import click
from rich.panel import Panel
from rich.table import Table

from borderflux import pipeline
from borderflux.config import console, get_settings
from borderflux.config.logging import bind_run_context, setup_logging
from borderflux.config.run import (
    RunConfig,
    build_run_config,
    load_config_file,
    parse_window,
)
from borderflux.exceptions import BorderfluxError, ValidationError
from borderflux.flux import FluxModelRegistry
from borderflux.network import DetectorRegistry
from borderflux.synth import ACCEPTANCE_CAPITAL_RHO, make_society_spec


def handle_errors(command):
    """Report library errors in red and exit with their code."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except BorderfluxError as e:
            console.print(f"[red]{type(e).__name__}: {e}[/red]")
            sys.exit(e.exit_code)

    return wrapper


def parse_partitions(values: tuple[str, ...]) -> dict[str, pathlib.Path]:
    partitions = {}
    for value in values:
        name, sep, path = value.partition("=")
        if not sep or not name or not path:
            raise ValidationError(
                f"invalid partition '{value}'. Expected format: 'name=path'"
            )
        partitions[name] = pathlib.Path(path)
    return partitions


def input_options(command):
    """Input, window and output flags shared by the analysis commands."""
    options = [
        click.option("--antennas", type=click.Path(path_type=pathlib.Path)),
        click.option("--population", type=click.Path(path_type=pathlib.Path)),
        click.option("--cdr", type=click.Path(path_type=pathlib.Path)),
        click.option("--boundary", type=click.Path(path_type=pathlib.Path)),
        click.option(
            "--partition",
            "partitions",
            multiple=True,
            help="Partition scheme as name=path (repeatable)",
        ),
        click.option("--window", help="Study window as start:end (Unix seconds)"),
        click.option("--seed", type=int, help="Seed for randomised steps"),
        click.option(
            "--out", "-o", type=click.Path(path_type=pathlib.Path), help="Output dir"
        ),
        click.option("--utc-offset", type=float, help="Local time offset in hours"),
        click.option(
            "--weekdays-only/--all-days",
            default=None,
            help="Restrict temporal profiles to Monday-Friday",
        ),
        click.option(
            "--capital",
            "capital_regions",
            multiple=True,
            help="Region label treated as the capital area (repeatable)",
        ),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def run_config(ctx: click.Context, **flags: Any) -> RunConfig:
    window = flags.pop("window", None)
    if window:
        flags["window_start"], flags["window_end"] = parse_window(window)
    if "partitions" in flags:
        flags["partitions"] = parse_partitions(flags["partitions"])
    if "utc_offset" in flags:
        flags["utc_offset_hours"] = flags.pop("utc_offset")
    if "capital_regions" in flags:
        flags["capital_regions"] = list(flags["capital_regions"]) or None
    config = build_run_config(ctx.obj.get("file_values"), **flags)
    bind_run_context(ctx.info_name, seed=config.seed)
    return config


def show_result(title: str, result: pipeline.CommandResult) -> None:
    table = Table(title=title, show_header=True, header_style="bold cyan")
    table.add_column("Key")
    table.add_column("Value")
    for key, value in result.summary.items():
        if isinstance(value, float):
            value = f"{value:.6g}"
        table.add_row(str(key), str(value))
    for role, path in sorted(result.paths.items()):
        table.add_row(f"[dim]{role}[/dim]", f"[green]{path}[/green]")
    console.print(table)


@click.group()
@click.pass_context
@click.version_option(package_name="borderflux")
@click.option(
    "--config",
    "config_path",
    type=click.Path(path_type=pathlib.Path),
    help="YAML file with default flag values",
)
@click.option("--verbose", "-v", is_flag=True, help="Enable verbose output")
def cli(ctx, config_path, verbose):
    """borderflux - human mobility, flux models and border strength from CDR data."""
    settings = get_settings()
    ctx.ensure_object(dict)
    ctx.obj["file_values"] = None
    try:
        setup_logging("INFO" if verbose else settings.log_level, settings.log_format)
        if config_path is not None:
            ctx.obj["file_values"] = load_config_file(config_path)
    except BorderfluxError as e:
        console.print(f"[red]{type(e).__name__}: {e}[/red]")
        sys.exit(e.exit_code)


@cli.command(name="tessellate")
@input_options
@click.pass_context
@handle_errors
def tessellate_cli(ctx, **flags):
    """Build Voronoi cells and assign population to every antenna."""
    result = pipeline.run_tessellate(run_config(ctx, **flags))
    show_result("Tessellation", result)


@cli.command(name="stats")
@click.argument("which", type=click.Choice(pipeline.STATS_KINDS))
@click.option("--scheme", help="Partition for per-region fits or the capital subset")
@input_options
@click.pass_context
@handle_errors
def stats_cli(ctx, which, scheme, **flags):
    """Jump sizes, radius of gyration or temporal mobility profiles."""
    result = pipeline.run_stats(run_config(ctx, **flags), which, scheme_name=scheme)
    show_result(f"Statistics: {which}", result)


@cli.command(name="communities")
@click.option("--within", help="Detect sub-communities inside each region of NAME")
@click.option("--detector", default="louvain", show_default=True)
@click.option("--all-indices", is_flag=True, help="Add the reverse Wallace index")
@input_options
@click.pass_context
@handle_errors
def communities_cli(ctx, within, detector, all_indices, **flags):
    """Detect communities on the mobility network and compare them to partitions."""
    result = pipeline.run_communities(
        run_config(ctx, **flags),
        within=within,
        detector=detector,
        verbose_indices=all_indices,
    )
    show_result("Communities", result)


@cli.command(name="model")
@click.option("--model", "model_name", required=True, help="Flux model name")
@click.option(
    "--scheme",
    "schemes",
    multiple=True,
    help="Scheme name or name:level1 (repeatable); 'communities' detects one",
)
@click.option("--within", help="Level-1 grouping for schemes given without one")
@input_options
@click.pass_context
@handle_errors
def model_cli(ctx, model_name, schemes, within, **flags):
    """Fit a flux model and score it against the observed flux."""
    result = pipeline.run_model(
        run_config(ctx, **flags), model_name, schemes, within=within
    )
    show_result(f"Model: {model_name}", result)


@cli.command(name="affinity")
@click.option("--model", "model_name", required=True, help="Flux model name")
@click.option(
    "--scheme", "schemes", multiple=True, help="Pair as name:level1 (repeatable)"
)
@click.option("--within", help="Level-1 grouping for schemes given without one")
@input_options
@click.pass_context
@handle_errors
def affinity_cli(ctx, model_name, schemes, within, **flags):
    """Compare model error inside and across level-1 regions."""
    result = pipeline.run_affinity(
        run_config(ctx, **flags), model_name, schemes, within=within
    )
    show_result(f"Affinity: {model_name}", result)


@cli.command(name="borders")
@click.option("--scheme", required=True, help="Partition whose borders are scored")
@click.option("--spacing-km", type=float, help="Distance between border samples")
@click.option("--k-neighbors", type=int, help="Neighbours used for interpolation")
@input_options
@click.pass_context
@handle_errors
def borders_cli(ctx, scheme, spacing_km, k_neighbors, **flags):
    """Border-strength field, border samples and histograms."""
    result = pipeline.run_borders(
        run_config(ctx, **flags),
        scheme,
        spacing_km=spacing_km,
        k_neighbors=k_neighbors,
    )
    show_result(f"Borders: {scheme}", result)


@cli.command(name="synth")
@click.option("--seed", type=int, required=True)
@click.option(
    "--out", "-o", type=click.Path(path_type=pathlib.Path), required=True
)
@click.option(
    "--spec",
    "spec_path",
    type=click.Path(path_type=pathlib.Path),
    help="YAML file with society parameters",
)
@click.option("--users", type=int, help="Number of simulated users")
@click.option("--antennas", "n_antennas", type=int, help="Number of antennas")
@click.option("--days", type=int, help="Simulated days")
@click.option(
    "--capital-rho",
    type=float,
    help=f"Capital stay probability (porous capital: {ACCEPTANCE_CAPITAL_RHO})",
)
@handle_errors
def synth_cli(seed, out, spec_path, users, n_antennas, days, capital_rho):
    """Generate a synthetic society with known mobility structure."""
    bind_run_context("synth", seed=seed)
    values: dict[str, Any] = {}
    if spec_path is not None:
        values.update(load_config_file(spec_path))
    overrides = {
        "seed": seed,
        "n_users": users,
        "n_antennas": n_antennas,
        "days": days,
        "capital_rho": capital_rho,
    }
    values.update({k: v for k, v in overrides.items() if v is not None})
    result = pipeline.run_synth(make_society_spec(**values), out)
    show_result("Synthetic society", result)


@cli.command(name="models")
def models_cli():
    """Show available flux models and community detectors."""
    console.print(
        Panel.fit(
            "Flux models and community detectors",
            border_style="blue",
            title="[bold green]Registries[/bold green]",
        )
    )
    for name in FluxModelRegistry.names():
        console.print(f"\n[bold cyan]{name}[/bold cyan]")
        console.print(f"  {FluxModelRegistry.describe(name)}")
    for name in DetectorRegistry.names():
        console.print(f"\n[bold cyan]{name}[/bold cyan] (detector)")
        console.print(f"  version: [yellow]{DetectorRegistry.version(name)}[/yellow]")


if __name__ == "__main__":
    cli()
