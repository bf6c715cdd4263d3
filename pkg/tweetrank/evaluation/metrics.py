"""
TREC-style effectiveness metrics over ranked runs.

A document is relevant when its grade is at least 1. Unjudged documents are
not relevant. Only the order of each ranked list matters.
"""

from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger

from tweetrank.data.readers import Qrels, RankedRun

RankedList = Sequence[Union[str, Tuple[str, float]]]

DEFAULT_METRICS = ("map", "P_30")


def _doc_ids(ranked: RankedList) -> List[str]:
    return [row if isinstance(row, str) else row[0] for row in ranked]


def num_relevant(judgments: Optional[Mapping[str, int]]) -> int:
    return sum(1 for grade in (judgments or {}).values() if grade >= 1)


def average_precision(ranked: RankedList, judgments: Optional[Mapping[str, int]]) -> Optional[float]:
    r"""
    Average precision of one ranked list:
    `(1/R) * sum over the ranks r of relevant docs of (relevant docs in top r) / r`.

    Parameters:
        ranked: Doc ids, or `(doc_id, score)` rows, in rank order
        judgments: doc_id -> grade of the query

    Returns:
        AP in [0, 1], or `None` (with a warning) when the query has no relevant document
    """
    judgments = judgments or {}
    total_relevant = num_relevant(judgments)
    if total_relevant == 0:
        logger.warning("Query without relevant documents, average precision is undefined")
        return None
    hits = 0
    precision_sum = 0.0
    for rank, doc_id in enumerate(_doc_ids(ranked), start=1):
        if judgments.get(doc_id, 0) >= 1:
            hits += 1
            precision_sum += hits / rank
    return precision_sum / total_relevant


def precision_at_k(ranked: RankedList, judgments: Optional[Mapping[str, int]], k: int = 30) -> float:
    """Relevant documents in the top `k`, divided by `k` even when fewer documents are ranked."""
    judgments = judgments or {}
    top = _doc_ids(ranked)[:k]
    return sum(1 for doc_id in top if judgments.get(doc_id, 0) >= 1) / k


def metric_value(metric: str, ranked: RankedList, judgments: Optional[Mapping[str, int]]) -> Optional[float]:
    """Value of `map` or `P_<k>` for one query."""
    if metric == "map":
        return average_precision(ranked, judgments)
    if metric.startswith("P_"):
        return precision_at_k(ranked, judgments, int(metric[2:]))
    raise ValueError(f"Unknown metric `{metric}`")


def judged_topics(run: RankedRun, qrels: Qrels) -> List[str]:
    """Topics of `run` with at least one relevant document, sorted."""
    topics = sorted(q for q in run if num_relevant(qrels.get(q)) > 0)
    skipped = [q for q in run if num_relevant(qrels.get(q)) == 0]
    if skipped:
        logger.warning(f"{len(skipped)} topics without relevant documents excluded from evaluation")
    return topics


def per_topic_values(
    run: RankedRun, qrels: Qrels, metric: str, topics: Optional[Sequence[str]] = None
) -> np.ndarray:
    r"""
    Metric value of every topic of `topics` (default: `judged_topics`).
    A topic absent from the run scores 0.
    """
    topics = judged_topics(run, qrels) if topics is None else topics
    values = []
    for topic in topics:
        value = metric_value(metric, run.get(topic, []), qrels.get(topic))
        values.append(0.0 if value is None else value)
    return np.asarray(values, dtype=np.float64)


def mean_average_precision(run: RankedRun, qrels: Qrels) -> float:
    """MAP over the judged topics of the run, 0 when there are none."""
    values = per_topic_values(run, qrels, "map")
    return float(values.mean()) if values.size > 0 else 0.0


@dataclass
class RunEvaluation:
    r"""
    Parameters:
        per_topic: One row per topic, one column per metric, indexed by topic
        means: Mean of every metric over the topics
    """

    per_topic: pd.DataFrame
    means: Dict[str, float]


def evaluate_run(run: RankedRun, qrels: Qrels, metrics: Sequence[str] = DEFAULT_METRICS) -> RunEvaluation:
    """Per-topic metrics and their means over the judged topics of `run`."""
    topics = judged_topics(run, qrels)
    per_topic = pd.DataFrame(
        {metric: per_topic_values(run, qrels, metric, topics) for metric in metrics},
        index=pd.Index(topics, name="topic"),
    )
    means = {metric: (float(per_topic[metric].mean()) if len(topics) > 0 else 0.0) for metric in metrics}
    return RunEvaluation(per_topic=per_topic, means=means)
