"""
Linear interpolation of the network scores with a language-model score,
`lambda * NN(q, d) + (1 - lambda) * LM(q, d)`, after min-max normalizing
both scores within each query.
"""

from typing import Dict, List, Mapping, Tuple

import numpy as np
from loguru import logger

from tweetrank.data.readers import Qrels, RankedRun, rank_scores
from tweetrank.errors import AlignmentError
from tweetrank.evaluation.metrics import judged_topics, per_topic_values

ScoreTable = Mapping[str, Mapping[str, float]]

_TOL = 1e-12


def min_max_normalize(scores: Mapping[str, float]) -> Dict[str, float]:
    """Map the scores of one query to [0, 1]. A constant list maps to 0.5."""
    if len(scores) == 0:
        return {}
    values = np.asarray(list(scores.values()), dtype=np.float64)
    low, high = values.min(), values.max()
    if high - low <= 0:
        return {doc_id: 0.5 for doc_id in scores}
    return {doc_id: (float(score) - low) / (high - low) for doc_id, score in scores.items()}


def _check_aligned(nn_scores: ScoreTable, lm_scores: ScoreTable):
    if set(nn_scores) != set(lm_scores):
        missing = sorted(set(nn_scores) ^ set(lm_scores))
        raise AlignmentError(f"The two score tables cover different queries: {missing[:5]}")
    for query_id in nn_scores:
        if set(nn_scores[query_id]) != set(lm_scores[query_id]):
            raise AlignmentError(f"The two score tables cover different documents for query `{query_id}`")


def interpolate(nn_scores: ScoreTable, lm_scores: ScoreTable, lambda_: float) -> Dict[str, Dict[str, float]]:
    r"""
    Combined scores `lambda * nn_norm + (1 - lambda) * lm_norm` of every (query, doc) pair.

    Parameters:
        nn_scores: query_id -> doc_id -> network score
        lm_scores: query_id -> doc_id -> language-model score, same pairs as `nn_scores`
        lambda_: Weight of the network score, in [0, 1]
    """
    if not (0.0 <= lambda_ <= 1.0):
        raise ValueError(f"`lambda_` must be in [0, 1], got {lambda_}")
    _check_aligned(nn_scores, lm_scores)
    combined = {}
    for query_id in nn_scores:
        nn_norm = min_max_normalize(nn_scores[query_id])
        lm_norm = min_max_normalize(lm_scores[query_id])
        combined[query_id] = {
            doc_id: lambda_ * nn_norm[doc_id] + (1.0 - lambda_) * lm_norm[doc_id] for doc_id in nn_norm
        }
    return combined


def interpolated_run(nn_scores: ScoreTable, lm_scores: ScoreTable, lambda_: float) -> RankedRun:
    """`interpolate`, then rank every query by descending combined score."""
    combined = interpolate(nn_scores, lm_scores, lambda_)
    return {query_id: rank_scores(scores) for query_id, scores in combined.items()}


def lambda_grid(step: float = 0.05) -> List[float]:
    """`0, step, ..., 1`, computed as `i / n` so that the grid points are exact."""
    num = int(round(1.0 / step))
    return [i / num for i in range(num + 1)]


def tune_lambda(
    nn_scores: ScoreTable, lm_scores: ScoreTable, qrels: Qrels, step: float = 0.05
) -> Tuple[float, List[Tuple[float, float]]]:
    r"""
    Grid search of the interpolation weight maximizing MAP.

    Returns:
        best_lambda: The best weight. Ties go to the smallest weight.
        table: `(lambda, MAP)` for every grid point
    """
    _check_aligned(nn_scores, lm_scores)
    topics = judged_topics(nn_scores, qrels)
    best_lambda, best_map = 0.0, -np.inf
    table = []
    for lambda_ in lambda_grid(step):
        values = per_topic_values(interpolated_run(nn_scores, lm_scores, lambda_), qrels, "map", topics)
        value = float(values.mean()) if values.size > 0 else 0.0
        table.append((lambda_, value))
        if value > best_map + _TOL:
            best_lambda, best_map = lambda_, value
    logger.info(f"Tuned interpolation weight lambda={best_lambda:.2f} (MAP {best_map:.4f})")
    return best_lambda, table
