from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from tqdm import tqdm

from tweetrank.baselines.interpolation import interpolated_run
from tweetrank.baselines.query_likelihood import ql_score
from tweetrank.config.options import QlConfig
from tweetrank.corpus.stats import CollectionStats, load_stats, save_stats
from tweetrank.data.collate import iterate_batches
from tweetrank.data.dataset import PairEncoder, QueryGroup
from tweetrank.data.readers import RankedRun, rank_scores
from tweetrank.errors import VocabularyMismatchError
from tweetrank.features.tokenizer import TokenizedDoc
from tweetrank.features.vocabulary import Vocabulary
from tweetrank.nn.architectures.mphcnn import MPHCNN
from tweetrank.trainer.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from tweetrank.utils.fs import join, mkdir

CHECKPOINT_FILE = "model.ckpt"
VOCAB_FILE = "vocab.tsv"
STATS_FILE = "stats.tsv"

ScoreTable = Dict[str, Dict[str, float]]


class Predictor:
    def __init__(
        self,
        model: MPHCNN,
        vocab: Vocabulary,
        stats: CollectionStats,
        lambda_: Optional[float] = None,
        batch_size: int = 256,
        progress: bool = False,
    ):
        r"""
        Scores and ranks candidate posts with a trained network.

        Parameters:
            model: The trained network
            vocab: The vocabulary the network was trained with
            stats: Statistics giving the query phrase weights
            lambda_: Interpolation weight tuned at training, if any
            batch_size: Pairs scored at once
            progress: Show a progress bar over the queries
        """
        self.model = model
        self.vocab = vocab
        self.stats = stats
        self.lambda_ = lambda_
        self.batch_size = batch_size
        self.progress = progress
        self.encoder = PairEncoder(vocab, stats, model.config)

    def score(self, query: TokenizedDoc, candidates: Sequence[TokenizedDoc]) -> np.ndarray:
        """Probability of relevance of every candidate, in order."""
        pairs = [self.encoder.encode(query, doc) for doc in candidates]
        scores = [self.model.forward(b, training=False)[0] for b in iterate_batches(pairs, self.batch_size)]
        return np.concatenate(scores) if scores else np.zeros(0)

    def rank(self, query: TokenizedDoc, candidates: Sequence[TokenizedDoc]) -> List[Tuple[str, float]]:
        """Candidates by descending probability of relevance, ties broken by ascending doc_id."""
        scores = self.score(query, candidates)
        return rank_scores({doc.doc_id: float(s) for doc, s in zip(candidates, scores)})

    def score_groups(self, groups: Sequence[QueryGroup]) -> ScoreTable:
        table = {}
        for group in tqdm(groups, desc="Scoring queries", disable=not self.progress):
            scores = self.score(group.query, group.candidates)
            table[group.query_id] = {doc.doc_id: float(s) for doc, s in zip(group.candidates, scores)}
        return table

    def rerank(self, groups: Sequence[QueryGroup]) -> RankedRun:
        return {query_id: rank_scores(scores) for query_id, scores in self.score_groups(groups).items()}

    def ql_scores(self, groups: Sequence[QueryGroup], config: Optional[QlConfig] = None) -> ScoreTable:
        table = {}
        for group in groups:
            query = group.query.word_tokens
            table[group.query_id] = {
                doc.doc_id: ql_score(query, doc.word_tokens, self.stats, config) for doc in group.candidates
            }
        return table

    def interpolate(
        self,
        groups: Sequence[QueryGroup],
        lambda_: Optional[float] = None,
        config: Optional[QlConfig] = None,
        nn_scores: Optional[ScoreTable] = None,
    ) -> RankedRun:
        r"""
        Rank by `lambda * NN + (1 - lambda) * QL` after per-query min-max normalization.
        `lambda_` defaults to the weight tuned at training.
        """
        lambda_ = self.lambda_ if lambda_ is None else lambda_
        if lambda_ is None:
            raise ValueError("No interpolation weight was given nor tuned at training")
        nn_scores = self.score_groups(groups) if nn_scores is None else nn_scores
        return interpolated_run(nn_scores, self.ql_scores(groups, config), lambda_)

    def save(self, directory: str):
        """Write the checkpoint, the vocabulary and the statistics to `directory`."""
        mkdir(directory)
        metadata = {"num_words": self.model.num_words, "num_trigrams": self.model.num_trigrams}
        if self.lambda_ is not None:
            metadata["lambda"] = float(self.lambda_)
        checkpoint = Checkpoint(
            config=self.model.config,
            arrays=self.model.params.arrays(),
            vocab_hash=self.vocab.hash,
            metadata=metadata,
        )
        save_checkpoint(checkpoint, join(directory, CHECKPOINT_FILE))
        self.vocab.save(join(directory, VOCAB_FILE))
        save_stats(self.stats, join(directory, STATS_FILE))

    @classmethod
    def load(cls, directory: str, batch_size: int = 256, progress: bool = False) -> "Predictor":
        r"""
        Load a predictor saved with `save`.
        Refuses a vocabulary whose hash differs from the one recorded in the checkpoint.
        """
        checkpoint = load_checkpoint(join(directory, CHECKPOINT_FILE))
        vocab = Vocabulary.load(join(directory, VOCAB_FILE))
        if vocab.hash != checkpoint.vocab_hash:
            raise VocabularyMismatchError(
                f"The vocabulary of {directory} does not match the checkpoint "
                f"({vocab.hash} vs {checkpoint.vocab_hash})"
            )
        stats = load_stats(join(directory, STATS_FILE))
        model = MPHCNN(checkpoint.config, num_words=vocab.num_words, num_trigrams=vocab.num_trigrams)
        model.params.assign(checkpoint.arrays)
        lambda_ = checkpoint.metadata.get("lambda")
        logger.info(f"Loaded {model} from {directory}")
        return cls(model, vocab, stats, lambda_=lambda_, batch_size=batch_size, progress=progress)
