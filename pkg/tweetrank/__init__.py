from ._version import __version__

from .config import load_config

from . import utils
from . import features
from . import corpus
from . import data
from . import nn
from . import trainer
from . import baselines
from . import evaluation
