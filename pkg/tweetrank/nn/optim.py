from dataclasses import dataclass
from typing import Mapping

import numpy as np

from tweetrank.errors import ConfigError, NumericError, OptimizerError
from tweetrank.nn.tensor import Tensor

MAX_SEED = 2**64 - 1


@dataclass
class SgdConfig:
    r"""
    Parameters:
        learning_rate: Step size, strictly positive.
        seed: Seed of the generator driving shuffling, initialization and dropout.
    """

    learning_rate: float = 0.05
    seed: int = 42

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ConfigError(f"`learning_rate` must be > 0, got {self.learning_rate}")
        if not (0 <= int(self.seed) <= MAX_SEED):
            raise ConfigError(f"`seed` must be a 64-bit unsigned integer, got {self.seed}")


def sgd_step(params: Mapping[str, Tensor], config: SgdConfig):
    r"""
    Plain gradient descent: `p <- p - lr * grad(p)` for every parameter,
    then reset every gradient to zero.
    """
    for name, param in params.items():
        if param.grad is None:
            raise OptimizerError("Missing gradient for parameter", name)

    for name, param in params.items():
        param.data -= config.learning_rate * param.grad
        if not np.all(np.isfinite(param.data)):
            raise NumericError(f"Parameter `{name}` became non-finite after the SGD step")
        param.zero_grad()
