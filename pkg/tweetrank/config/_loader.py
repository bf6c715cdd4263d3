from dataclasses import asdict
from typing import Any, Dict, List, Optional, Sequence, Union

import yaml
from loguru import logger
from omegaconf import DictConfig, OmegaConf
from omegaconf.errors import OmegaConfBaseException

from tweetrank.config.options import ExperimentConfig
from tweetrank.errors import ConfigError
from tweetrank.utils import fs
from tweetrank.utils.read_file import file_opener

DEFAULT_STATS_FILE = "stats.tsv"
DEFAULT_CHECKPOINT_DIR = "model"


def _load_yaml(config_path: str) -> Dict[str, Any]:
    fs.require_exists(config_path, what="config file")
    with file_opener(config_path, "r") as f:
        try:
            config = yaml.safe_load(f)
        except yaml.YAMLError as err:
            raise ConfigError(f"Malformed config file {config_path}: {err}")
    if config is None:
        return {}
    if not isinstance(config, dict):
        raise ConfigError(f"The config file {config_path} must hold a mapping of sections")
    return config


def resolve_paths(config: ExperimentConfig) -> ExperimentConfig:
    r"""
    Fill the paths that default to other paths:
    `background_corpus` to `corpus`, `stats` and `checkpoint_dir` to files of `output_dir`.
    """
    paths = config.paths
    if paths.background_corpus is None:
        paths.background_corpus = paths.corpus
    if paths.stats is None:
        paths.stats = fs.join(paths.output_dir, DEFAULT_STATS_FILE)
    if paths.checkpoint_dir is None:
        paths.checkpoint_dir = fs.join(paths.output_dir, DEFAULT_CHECKPOINT_DIR)
    return config


def load_experiment_config(
    config_path: Optional[str] = None,
    overrides: Optional[Sequence[str]] = None,
    seed: Optional[int] = None,
    output_dir: Optional[str] = None,
) -> ExperimentConfig:
    r"""
    Build the experiment config from its schema, a YAML file and command line overrides.

    Values are merged in order: the dataclass defaults, the file, the
    `section.key=value` dot-list `overrides`, then `seed` and `output_dir`.
    The dataclasses are instantiated last, so their checks see the final values.

    Parameters:
        config_path: YAML file with one section per config dataclass
        overrides: Dot-list overrides, e.g. `["model.depth=2", "lambda_=0.5"]`
        seed: Overrides `seed`
        output_dir: Overrides `paths.output_dir`

    Returns:
        The validated config, with derived paths resolved

    Raises:
        ConfigError: Unknown keys, ill-typed values or values failing the checks
    """
    try:
        config = OmegaConf.structured(ExperimentConfig)
        if config_path is not None:
            config = OmegaConf.merge(config, _load_yaml(config_path))
        if overrides:
            config = OmegaConf.merge(config, OmegaConf.from_dotlist(list(overrides)))
        if seed is not None:
            config.seed = seed
        if output_dir is not None:
            config.paths.output_dir = output_dir
        experiment = OmegaConf.to_object(config)
    except ConfigError:
        raise
    except (OmegaConfBaseException, ValueError, TypeError) as err:
        raise ConfigError(f"Invalid configuration: {err}")

    if config_path is not None:
        logger.info(f"Loaded the configuration from {config_path}")
    return resolve_paths(experiment)


def config_to_dict(config: Union[ExperimentConfig, DictConfig]) -> Dict[str, Any]:
    if isinstance(config, DictConfig):
        return OmegaConf.to_container(config, resolve=True)
    return asdict(config)


def save_config(config: Union[ExperimentConfig, Dict[str, Any]], path: str):
    """Write `config` as YAML, keys in declaration order."""
    if not isinstance(config, dict):
        config = config_to_dict(config)
    with file_opener(path, "w") as f:
        yaml.safe_dump(config, f, sort_keys=False)
    logger.info(f"Saved the configuration to {path}")


def required_paths(config: ExperimentConfig, names: List[str]) -> Dict[str, str]:
    r"""
    The paths `names` of `config.paths`, checked to be set and to exist.

    Raises:
        ConfigError: A path is not set
        MissingPathError: A path does not exist
    """
    paths = {}
    for name in names:
        path = getattr(config.paths, name)
        if path is None:
            raise ConfigError(f"`paths.{name}` is required by this command")
        fs.require_exists(path, what=name.replace("_", " "))
        paths[name] = path
    return paths
