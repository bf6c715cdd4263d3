"""Mini-batch SGD training with early stopping on validation MAP."""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from loguru import logger
from tqdm import tqdm

from tweetrank.config.options import TrainingConfig
from tweetrank.data.collate import EncodedPair, iterate_batches
from tweetrank.data.readers import Qrels, RankedRun, rank_scores
from tweetrank.errors import TrainingError
from tweetrank.evaluation.metrics import mean_average_precision
from tweetrank.nn.architectures.mphcnn import MPHCNN
from tweetrank.nn.optim import SgdConfig, sgd_step
from tweetrank.nn.tensor import Tape
from tweetrank.trainer.losses import pointwise_nll

_TOL = 1e-12


@dataclass
class EpochLog:
    r"""
    Parameters:
        epoch: 1-based epoch number
        train_loss: Summed negative log-likelihood over the training pairs
        val_map: MAP of the monitored set after the epoch
    """

    epoch: int
    train_loss: float
    val_map: float


@dataclass
class TrainingLog:
    epochs: List[EpochLog] = field(default_factory=list)
    best_epoch: int = 0
    best_val_map: float = -np.inf
    monitored: str = "validation"

    @property
    def losses(self) -> List[float]:
        return [e.train_loss for e in self.epochs]


def score_pairs(model: MPHCNN, pairs: Sequence[EncodedPair], batch_size: int = 256) -> np.ndarray:
    """Probability of the relevant class for every pair, in order. No dropout, no tape."""
    scores = [model.forward(batch, training=False)[0] for batch in iterate_batches(pairs, batch_size)]
    return np.concatenate(scores) if scores else np.zeros(0)


def pairs_to_run(pairs: Sequence[EncodedPair], scores: np.ndarray) -> RankedRun:
    """Group scored pairs per query and rank them."""
    table: Dict[str, Dict[str, float]] = {}
    for pair, score in zip(pairs, scores):
        table.setdefault(pair.query_id, {})[pair.doc_id] = float(score)
    return {query_id: rank_scores(docs) for query_id, docs in table.items()}


def pairs_to_qrels(pairs: Sequence[EncodedPair]) -> Qrels:
    qrels: Qrels = {}
    for pair in pairs:
        qrels.setdefault(pair.query_id, {})[pair.doc_id] = int(pair.label)
    return qrels


class Trainer:
    def __init__(self, model: MPHCNN, config: TrainingConfig, seed: int = 42):
        r"""
        Parameters:
            model: The network to train in place
            config: Optimization options. A learning rate of 0 leaves the parameters untouched.
            seed: Seed of the generator driving shuffling and dropout
        """
        self.model = model
        self.config = config
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.sgd = None
        if config.learning_rate > 0:
            self.sgd = SgdConfig(learning_rate=config.learning_rate, seed=seed)

    def train_epoch(self, pairs: Sequence[EncodedPair], epoch: int = 0) -> float:
        r"""
        One pass over `pairs` in a shuffled order.

        Returns:
            The summed negative log-likelihood of the epoch
        """
        params = self.model.params
        order = self.rng.permutation(len(pairs))
        total = 0.0
        batches = iterate_batches(pairs, self.config.batch_size, order)
        num_batches = (len(pairs) + self.config.batch_size - 1) // self.config.batch_size
        disable = not self.config.progress
        for batch in tqdm(batches, total=num_batches, desc=f"Epoch {epoch}", disable=disable):
            with Tape() as tape:
                logits, _ = self.model.logits(batch, rng=self.rng)
                loss, batch_total = pointwise_nll(logits, batch.labels, self.config.loss_reduction)
                tape.backward(loss)
            if self.sgd is not None:
                sgd_step(params, self.sgd)
            else:
                params.zero_grad()
            total += batch_total
        return total

    def evaluate(self, pairs: Sequence[EncodedPair]) -> float:
        """MAP of the model ranking of `pairs`, judged by their labels."""
        run = pairs_to_run(pairs, score_pairs(self.model, pairs))
        return mean_average_precision(run, pairs_to_qrels(pairs))

    def fit(
        self, train_pairs: Sequence[EncodedPair], val_pairs: Optional[Sequence[EncodedPair]] = None
    ) -> TrainingLog:
        r"""
        Train until `max_epochs` or until the monitored MAP has not improved
        for `patience` epochs, never stopping before `min_epochs`, then restore the parameters
        of the best epoch.

        The validation pairs are monitored; without them the training pairs are.
        """
        if len(train_pairs) == 0:
            raise TrainingError("The training set is empty")
        if sum(p.label for p in train_pairs) == 0:
            raise TrainingError("No training pair is labeled relevant")

        log = TrainingLog()
        monitored = val_pairs
        if not val_pairs:
            logger.warning("No validation queries, early stopping monitors the training MAP")
            monitored, log.monitored = train_pairs, "train"

        params = self.model.params
        best_arrays = params.arrays()
        stale = 0
        for epoch in range(1, self.config.max_epochs + 1):
            train_loss = self.train_epoch(train_pairs, epoch)
            val_map = self.evaluate(monitored)
            log.epochs.append(EpochLog(epoch=epoch, train_loss=train_loss, val_map=val_map))
            logger.info(f"Epoch {epoch}: loss={train_loss:.6f} {log.monitored}_map={val_map:.4f}")
            if val_map > log.best_val_map + _TOL:
                log.best_epoch, log.best_val_map = epoch, val_map
                best_arrays = params.arrays()
                stale = 0
            else:
                stale += 1
                if stale >= self.config.patience and epoch >= self.config.min_epochs:
                    logger.info(f"Early stopping after epoch {epoch}, best epoch {log.best_epoch}")
                    break

        params.assign(best_arrays)
        return log
