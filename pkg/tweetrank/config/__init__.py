from ._load import load_config
from ._loader import (
    config_to_dict,
    load_experiment_config,
    required_paths,
    resolve_paths,
    save_config,
)
from .options import (
    ABLATION_FLAGS,
    EvalConfig,
    ExperimentConfig,
    ModelConfig,
    PathsConfig,
    QlConfig,
    StatsConfig,
    TrainingConfig,
)
