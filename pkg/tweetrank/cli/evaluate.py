from typing import List, Optional

import typer
from loguru import logger

from tweetrank.cli.main import app, get_options
from tweetrank.cli.pipeline import DEFAULT_DEPTHS, run_ablation, run_evaluation
from tweetrank.config import ABLATION_FLAGS
from tweetrank.errors import ConfigError, UsageError


def split_overrides(args: Optional[List[str]]):
    """Separate the `section.key=value` overrides from the other positional arguments."""
    args = args or []
    return [a for a in args if "=" not in a], [a for a in args if "=" in a]


@app.command(name="evaluate", help="Compute MAP and P@k of one run, or compare two runs with p-values.")
def evaluate(
    ctx: typer.Context,
    args: List[str] = typer.Argument(..., help="One or two run files, then optional `section.key=value`."),
    qrels: Optional[str] = typer.Option(None, help="Qrels file, defaults to `paths.qrels`."),
    plot: Optional[bool] = typer.Option(None, "--plot/--no-plot", help="Save per-topic difference charts."),
):
    run_files, overrides = split_overrides(args)
    if not (1 <= len(run_files) <= 2):
        raise UsageError(f"`evaluate` takes one or two run files, got {len(run_files)}")
    config = get_options(ctx).experiment(overrides)
    tables = run_evaluation(config, run_files, qrels_path=qrels, plot=plot)
    typer.echo(tables["metrics"].to_string(index=False))
    if "comparison" in tables:
        typer.echo(tables["comparison"].to_string(index=False))


@app.command(name="ablate", help="Train one model per ablation flag and compare it to the full model.")
def ablate(
    ctx: typer.Context,
    flag: Optional[List[str]] = typer.Option(
        None,
        "--flag",
        "-f",
        help=f"Ablation flag, repeatable. Defaults to all of {', '.join(ABLATION_FLAGS)}.",
    ),
    depth_sweep: bool = typer.Option(
        False, "--depth-sweep", help="Also sweep the conv depth of the full model."
    ),
    depth: Optional[List[int]] = typer.Option(
        None, "--depth", help="Depths of the sweep, defaults to 0 to 4."
    ),
    overrides: Optional[List[str]] = typer.Argument(None, help="Config overrides as `section.key=value`."),
):
    flags = list(flag) if flag else list(ABLATION_FLAGS)
    unknown = [f for f in flags if f not in ABLATION_FLAGS]
    if unknown:
        raise ConfigError(f"Unknown ablation flags {unknown}. Valid flags: {', '.join(ABLATION_FLAGS)}")
    config = get_options(ctx).experiment(overrides)
    depths = None
    if depth_sweep:
        depths = list(depth) if depth else list(DEFAULT_DEPTHS)
    tables = run_ablation(config, flags, depths)
    for name, table in tables.items():
        logger.info(f"{name}:\n{table.to_string(index=False)}")
        typer.echo(table.to_string(index=False))
