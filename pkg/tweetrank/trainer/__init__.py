from .losses import pointwise_nll, nll_from_probs
from .checkpoint import Checkpoint, save_checkpoint, load_checkpoint
from .trainer import Trainer, TrainingLog, EpochLog, score_pairs, pairs_to_run
from .predictor import Predictor
