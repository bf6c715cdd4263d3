import sys
from dataclasses import dataclass
from typing import List, Optional

import click
import typer
from loguru import logger

from tweetrank.config import ExperimentConfig, load_experiment_config
from tweetrank.errors import EXIT_USAGE, TweetrankError

app = typer.Typer(
    add_completion=False, help="Rerank microblog posts with hierarchical convolutional matching."
)

# Recent typer releases run a vendored copy of click, older ones the installed click
CLICK_ERRORS = tuple(
    {click.ClickException} | {cls for cls in typer.BadParameter.__mro__ if cls.__name__ == "ClickException"}
)
ABORT_ERRORS = tuple({click.exceptions.Abort, typer.Abort})


@dataclass
class GlobalOptions:
    config: Optional[str] = None
    seed: Optional[int] = None
    output_dir: Optional[str] = None

    def experiment(self, overrides: Optional[List[str]] = None) -> ExperimentConfig:
        """The config of the `--config` file updated with the dot-list `overrides` and the global flags."""
        return load_experiment_config(self.config, overrides, seed=self.seed, output_dir=self.output_dir)


@app.callback()
def global_options(
    ctx: typer.Context,
    config: Optional[str] = typer.Option(None, "--config", "-c", help="YAML config file."),
    seed: Optional[int] = typer.Option(None, "--seed", help="Seed of every randomized step."),
    output_dir: Optional[str] = typer.Option(None, "--output-dir", "-o", help="Directory of the artifacts."),
):
    ctx.obj = GlobalOptions(config=config, seed=seed, output_dir=output_dir)


def get_options(ctx: typer.Context) -> GlobalOptions:
    return ctx.obj if isinstance(ctx.obj, GlobalOptions) else GlobalOptions()


def main(args: Optional[List[str]] = None):
    r"""
    Console entry point. Exits with 0 on success, 1 on usage errors,
    2 on data and format errors and 3 on numeric failures.
    """
    command = typer.main.get_command(app)
    try:
        code = command.main(args=args, prog_name="tweetrank", standalone_mode=False)
    except ABORT_ERRORS:
        logger.error("Aborted")
        code = EXIT_USAGE
    except CLICK_ERRORS as err:
        err.show()
        code = EXIT_USAGE
    except TweetrankError as err:
        logger.error(f"{type(err).__name__}: {err}")
        code = err.exit_code
    sys.exit(code if isinstance(code, int) else 0)


if __name__ == "__main__":
    main()
