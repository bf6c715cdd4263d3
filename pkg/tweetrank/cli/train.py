import timeit
from typing import List, Optional

import typer
from loguru import logger

from tweetrank.cli.data import OVERRIDES_HELP
from tweetrank.cli.main import app, get_options
from tweetrank.cli.pipeline import DEFAULT_RUN_NAME, run_reranking, run_training


@app.command(name="train", help="Train the ranking network on the training run and save a checkpoint.")
def train(
    ctx: typer.Context,
    overrides: Optional[List[str]] = typer.Argument(None, help=OVERRIDES_HELP),
):
    config = get_options(ctx).experiment(overrides)
    st = timeit.default_timer()
    result = run_training(config)
    logger.info(
        f"Best epoch {result.log.best_epoch} with {result.log.monitored} MAP {result.log.best_val_map:.4f}, "
        f"lambda={result.predictor.lambda_:.2f}"
    )
    elapsed = timeit.default_timer() - st
    logger.info(f"Checkpoint saved to {config.paths.checkpoint_dir} in {elapsed:.2f} seconds.")


@app.command(name="rerank", help="Rerank the test run with a trained checkpoint.")
def rerank(
    ctx: typer.Context,
    name: str = typer.Option(DEFAULT_RUN_NAME, help="Name of the output runs, also used as run tag."),
    write_ql: bool = typer.Option(False, "--write-ql", help="Also write the query likelihood run."),
    overrides: Optional[List[str]] = typer.Argument(None, help=OVERRIDES_HELP),
):
    config = get_options(ctx).experiment(overrides)
    result = run_reranking(config, name=name, write_ql=write_ql)
    for path in result.paths.values():
        typer.echo(path)
