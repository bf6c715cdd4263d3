import math
from collections import Counter
from typing import List, Optional, Sequence, Tuple

from tweetrank.config.options import QlConfig
from tweetrank.corpus.stats import CollectionStats
from tweetrank.data.readers import rank_scores
from tweetrank.errors import StatsError
from tweetrank.features.tokenizer import TokenizedDoc


def ql_score(
    query_tokens: Sequence[str],
    doc_tokens: Sequence[str],
    stats: CollectionStats,
    config: Optional[QlConfig] = None,
) -> float:
    r"""
    Dirichlet-smoothed query likelihood
    `sum over query terms t of log((tf(t, d) + mu * p(t)) / (|d| + mu))`,
    with `p(t) = cf(t) / total_terms`, floored at `epsilon / total_terms` for
    terms absent from the collection.
    """
    config = QlConfig() if config is None else config
    if stats.total_terms <= 0:
        raise StatsError("Query likelihood needs statistics with a non-zero number of terms")
    tf = Counter(doc_tokens)
    denominator = len(doc_tokens) + config.mu
    score = 0.0
    for term in query_tokens:
        p_collection = max(stats.cf.get(term, 0), config.epsilon) / stats.total_terms
        score += math.log((tf.get(term, 0) + config.mu * p_collection) / denominator)
    return score


def ql_rank(
    query: TokenizedDoc,
    candidates: Sequence[TokenizedDoc],
    stats: CollectionStats,
    config: Optional[QlConfig] = None,
) -> List[Tuple[str, float]]:
    """Candidates ranked by query likelihood, ties broken by ascending doc_id."""
    scores = {doc.doc_id: ql_score(query.word_tokens, doc.word_tokens, stats, config) for doc in candidates}
    return rank_scores(scores)
