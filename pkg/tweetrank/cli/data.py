import timeit
from typing import List, Optional

import typer
from loguru import logger
from omegaconf import OmegaConf

from tweetrank.cli.main import app, get_options
from tweetrank.cli.pipeline import run_build_stats
from tweetrank.config import load_config, load_experiment_config, save_config
from tweetrank.data.synthetic import SIGNALS, SyntheticConfig, generate_synthetic, write_synthetic
from tweetrank.errors import ConfigError
from tweetrank.utils.fs import join
from tweetrank.utils.safe_run import SafeRun

SYNTHETIC_CONFIG_FILE = "config.yaml"

OVERRIDES_HELP = "Config overrides as `section.key=value`, e.g. `model.depth=2`."


@app.command(name="gen-synthetic", help="Generate a seeded synthetic dataset with planted relevance signals.")
def gen_synthetic(
    ctx: typer.Context,
    signal: str = typer.Option("term", help=f"Planted signal, one of {', '.join(SIGNALS)}."),
    num_train_queries: int = typer.Option(20, help="Number of training queries."),
    num_test_queries: int = typer.Option(10, help="Number of test queries."),
    docs_per_query: int = typer.Option(50, help="Candidates per query."),
    relevant_per_query: int = typer.Option(5, help="Relevant candidates per query."),
    overrides: Optional[List[str]] = typer.Argument(None, help=OVERRIDES_HELP),
):
    options = get_options(ctx)
    config = options.experiment(overrides)
    output_dir = config.paths.output_dir

    synthetic = SyntheticConfig(
        signal=signal,
        num_train_queries=num_train_queries,
        num_test_queries=num_test_queries,
        docs_per_query=docs_per_query,
        relevant_per_query=relevant_per_query,
        seed=config.seed,
    )
    with SafeRun(name="SYNTHETIC DATA"):
        paths = write_synthetic(generate_synthetic(synthetic), output_dir)

    # Desk-scale defaults with the generated paths, loadable with `--config`
    generated = OmegaConf.to_container(load_config("synthetic"))
    generated["paths"] = {**paths, "output_dir": output_dir}
    generated["seed"] = config.seed
    config_path = join(output_dir, SYNTHETIC_CONFIG_FILE)
    save_config(generated, config_path)
    load_experiment_config(config_path)
    logger.info(f"Synthetic `{signal}` dataset available in {output_dir}, run with `--config {config_path}`")


@app.command(name="build-stats", help="Count the n-gram statistics of the background corpus.")
def build_stats(
    ctx: typer.Context,
    overrides: Optional[List[str]] = typer.Argument(None, help=OVERRIDES_HELP),
):
    config = get_options(ctx).experiment(overrides)
    if config.paths.background_corpus is None:
        raise ConfigError("`paths.corpus` or `paths.background_corpus` is required by `build-stats`")
    st = timeit.default_timer()
    with SafeRun(name="COLLECTION STATISTICS"):
        run_build_stats(config)
    logger.info(f"Statistics written to {config.paths.stats} in {timeit.default_timer() - st:.2f} seconds.")
