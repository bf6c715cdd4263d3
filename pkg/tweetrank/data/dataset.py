"""
Assembly of query-candidate groups from the pipeline inputs, and their
encoding into padded model inputs.
"""

from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from tweetrank.config.options import ModelConfig
from tweetrank.corpus.stats import CollectionStats, query_phrase_weights
from tweetrank.data.collate import EncodedPair
from tweetrank.data.readers import Qrels, RankedRun
from tweetrank.errors import TrainingError
from tweetrank.features.tokenizer import TokenizedDoc
from tweetrank.features.vocabulary import Vocabulary, encode_and_pad

QUERY_CACHE_SIZE = 1024


@dataclass
class QueryGroup:
    r"""
    A query with its candidate posts, in input-run order.

    Parameters:
        query: The tokenized query
        candidates: The tokenized candidate posts
        labels: 1 for relevant candidates (grade >= 1), 0 for the others including unjudged ones
    """

    query: TokenizedDoc
    candidates: List[TokenizedDoc]
    labels: np.ndarray

    @property
    def query_id(self) -> str:
        return self.query.doc_id

    @property
    def num_relevant(self) -> int:
        return int(self.labels.sum())


def build_groups(
    topics: Mapping[str, TokenizedDoc],
    run: RankedRun,
    corpus: Mapping[str, TokenizedDoc],
    qrels: Optional[Qrels] = None,
) -> List[QueryGroup]:
    r"""
    Join the candidate run with the topics, the corpus and the judgments.

    Topics absent from the run and candidates absent from the corpus are skipped
    with a warning. Without `qrels`, every label is 0.
    """
    groups = []
    missing_docs = 0
    unjudged = 0
    for query_id, query in topics.items():
        if query_id not in run:
            logger.warning(f"Topic `{query_id}` has no candidate in the run, skipped")
            continue
        candidates = []
        for doc_id, _ in run[query_id]:
            if doc_id not in corpus:
                missing_docs += 1
                continue
            candidates.append(corpus[doc_id])
        if len(candidates) == 0:
            logger.warning(f"No candidate of topic `{query_id}` is in the corpus, skipped")
            continue
        judgments = (qrels or {}).get(query_id, {})
        unjudged += sum(doc.doc_id not in judgments for doc in candidates)
        labels = np.asarray([int(judgments.get(doc.doc_id, 0) >= 1) for doc in candidates], dtype=np.int64)
        groups.append(QueryGroup(query=query, candidates=candidates, labels=labels))
    if missing_docs > 0:
        logger.warning(f"{missing_docs} candidates are missing from the corpus and were skipped")
    if qrels is not None and unjudged > 0:
        logger.warning(f"{unjudged} unjudged candidates are labeled non-relevant")
    unknown = sorted(set(run) - set(topics))
    if unknown:
        logger.warning(f"{len(unknown)} run queries are not in the topics file, e.g. `{unknown[0]}`")
    return groups


def check_trainable(groups: Sequence[QueryGroup]):
    """Raise `TrainingError` when there is nothing to train on."""
    if len(groups) == 0:
        raise TrainingError("The training set is empty")
    if sum(g.num_relevant for g in groups) == 0:
        raise TrainingError("The judgments mark none of the training candidates as relevant")


def compute_max_lengths(groups: Iterable[QueryGroup]) -> Dict[str, int]:
    """Longest query and post of the groups, in words and in trigrams. Every length is at least 1."""
    lengths = dict.fromkeys(ModelConfig.max_length_names(), 1)

    def update(name, value):
        lengths[name] = max(lengths[name], value)

    for group in groups:
        update("max_query_len", len(group.query.word_tokens))
        update("max_query_chars", len(group.query.char_trigrams))
        for doc in group.candidates:
            update("max_doc_len", len(doc.word_tokens))
            update("max_doc_chars", len(doc.char_trigrams))
            update("max_url_chars", len(doc.url_trigrams))
    return lengths


def resolve_max_lengths(config: ModelConfig, groups: Iterable[QueryGroup]) -> ModelConfig:
    """Copy of `config` where every unset maximum length is taken from the data."""
    computed = compute_max_lengths(groups)
    updates = {name: value for name, value in computed.items() if getattr(config, name) is None}
    if updates:
        logger.info(f"Maximum lengths from the data: {updates}")
    return replace(config, **updates)


class PairEncoder:
    def __init__(self, vocab: Vocabulary, stats: CollectionStats, config: ModelConfig):
        r"""
        Encode query-post pairs against a frozen vocabulary.

        Parameters:
            vocab: The vocabulary. It is frozen if it is not already.
            stats: Statistics providing the query phrase weights
            config: Model config with resolved maximum lengths
        """
        if not config.lengths_resolved():
            raise ValueError("The maximum lengths of the model config must be resolved before encoding")
        self.vocab = vocab.freeze()
        self.stats = stats
        self.config = config
        # Keyed on the query tokens, never on the query id
        self._encode_tokens = lru_cache(maxsize=QUERY_CACHE_SIZE)(self._encode_query_tokens)

    def _encode_query_tokens(
        self, word_tokens: Tuple[str, ...], char_trigrams: Tuple[str, ...]
    ) -> Tuple[np.ndarray, ...]:
        c = self.config
        word_ids, word_mask = encode_and_pad(
            word_tokens, self.vocab, c.max_query_len, "word", empty_as_oov=True
        )
        tri_ids, tri_mask = encode_and_pad(
            char_trigrams, self.vocab, c.max_query_chars, "trigram", empty_as_oov=True
        )
        word_weights = query_phrase_weights(
            word_tokens, self.stats, c.depth, c.k_word, "word", c.max_query_len
        )
        char_weights = query_phrase_weights(
            char_trigrams, self.stats, c.depth, c.k_char, "char", c.max_query_chars
        )
        return word_ids, word_mask, tri_ids, tri_mask, word_weights, char_weights

    def _encode_query(self, query: TokenizedDoc) -> Tuple[np.ndarray, ...]:
        return self._encode_tokens(tuple(query.word_tokens), tuple(query.char_trigrams))

    def encode(self, query: TokenizedDoc, doc: TokenizedDoc, label: int = 0) -> EncodedPair:
        c = self.config
        q_word_ids, q_word_mask, q_tri_ids, q_tri_mask, word_weights, char_weights = self._encode_query(query)
        vocab = self.vocab
        d_word_ids, d_word_mask = encode_and_pad(doc.word_tokens, vocab, c.max_doc_len, "word", True)
        d_tri_ids, d_tri_mask = encode_and_pad(doc.char_trigrams, vocab, c.max_doc_chars, "trigram", True)
        u_tri_ids, u_tri_mask = encode_and_pad(doc.url_trigrams, vocab, c.max_url_chars, "trigram", True)
        return EncodedPair(
            query_id=query.doc_id,
            doc_id=doc.doc_id,
            label=int(label),
            query_word_ids=q_word_ids,
            query_word_mask=q_word_mask,
            doc_word_ids=d_word_ids,
            doc_word_mask=d_word_mask,
            query_tri_ids=q_tri_ids,
            query_tri_mask=q_tri_mask,
            doc_tri_ids=d_tri_ids,
            doc_tri_mask=d_tri_mask,
            url_tri_ids=u_tri_ids,
            url_tri_mask=u_tri_mask,
            word_weights=word_weights,
            char_weights=char_weights,
        )

    def encode_groups(self, groups: Iterable[QueryGroup]) -> List[EncodedPair]:
        return [
            self.encode(group.query, doc, label)
            for group in groups
            for doc, label in zip(group.candidates, group.labels)
        ]


def split_queries(
    query_ids: Sequence[str], fraction: float = 0.15, seed: int = 42
) -> Tuple[List[str], List[str]]:
    r"""
    Seeded query-level split into training and validation queries.

    The validation set holds `round(fraction * Q)` queries, at least one when
    there are 2 queries or more and `fraction > 0`, and never all of them.

    Returns:
        train_ids, val_ids: Both in the order of `query_ids`
    """
    num_queries = len(query_ids)
    num_val = int(round(fraction * num_queries))
    if fraction > 0 and num_queries >= 2:
        num_val = max(1, num_val)
    num_val = min(num_val, max(num_queries - 1, 0))
    if num_val == 0:
        return list(query_ids), []
    rng = np.random.default_rng(seed)
    val = set(rng.permutation(sorted(query_ids))[:num_val].tolist())
    return [q for q in query_ids if q not in val], [q for q in query_ids if q in val]


def labels_as_qrels(groups: Iterable[QueryGroup]) -> Qrels:
    """Binary judgments of the groups, in the qrels layout."""
    return {
        group.query_id: {doc.doc_id: int(label) for doc, label in zip(group.candidates, group.labels)}
        for group in groups
    }

