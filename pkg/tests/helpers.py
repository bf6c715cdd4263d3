"""
Small hand-written inputs shared by the tests of the model, the trainer and the predictor.
"""

from collections import OrderedDict
from dataclasses import replace

import numpy as np

from tweetrank.config.options import ModelConfig
from tweetrank.corpus.stats import build_stats
from tweetrank.data.collate import collate
from tweetrank.data.dataset import PairEncoder, QueryGroup, resolve_max_lengths
from tweetrank.features.tokenizer import prepare_document, prepare_query
from tweetrank.features.vocabulary import Vocabulary

POSTS = [
    ("101", "BBC slashes online budget #bbcnews", "http://bbc-world-service-to-cut-staff.html"),
    ("102", "world service cuts announced today", None),
    ("103", "@user cooking pasta at home tonight http://t.co/abc", None),
    ("104", "new phone release rumours", None),
    ("105", "pasta recipes for busy weeknights", "http://t.co/def"),
]
URL_MAP = {
    "http://t.co/abc": "http://recipes.example.com/pasta-night",
    "http://t.co/def": "http://food.example.com/quick-pasta-recipes",
}
QUERIES = [("MB01", "BBC world service cuts"), ("MB02", "pasta recipes")]
QRELS = {"MB01": {"101": 2, "102": 1, "104": 0}, "MB02": {"103": 1, "105": 2, "101": 0}}


def tiny_corpus():
    return OrderedDict((doc_id, prepare_document(doc_id, text, url, URL_MAP)) for doc_id, text, url in POSTS)


def tiny_topics():
    return OrderedDict((query_id, prepare_query(query_id, text)) for query_id, text in QUERIES)


def tiny_groups():
    corpus, topics = tiny_corpus(), tiny_topics()
    groups = []
    for query_id, query in topics.items():
        candidates = list(corpus.values())
        labels = np.asarray([int(QRELS[query_id].get(doc.doc_id, 0) >= 1) for doc in candidates])
        groups.append(QueryGroup(query=query, candidates=candidates, labels=labels))
    return groups


def tiny_config(**kwargs) -> ModelConfig:
    options = dict(depth=1, num_filters=3, embedding_dim=4, mlp_hidden=5, dropout_rate=0.0, seed=7)
    options.update(kwargs)
    return resolve_max_lengths(ModelConfig(**options), tiny_groups())


def tiny_setup(**kwargs):
    r"""
    Returns:
        config, vocab, stats, groups, encoder: A resolved model config and every
            input needed to encode the tiny query-post pairs
    """
    corpus, topics = tiny_corpus(), tiny_topics()
    config = tiny_config(**kwargs)
    docs = list(corpus.values()) + list(topics.values())
    vocab = Vocabulary.build(docs, embedding_dim=config.embedding_dim)
    stats = build_stats(corpus.values(), progress=False)
    groups = tiny_groups()
    return config, vocab, stats, groups, PairEncoder(vocab, stats, config)


def tiny_batch(**kwargs):
    config, vocab, _, groups, encoder = tiny_setup(**kwargs)
    return config, vocab, collate(encoder.encode_groups(groups))


def with_lengths(config: ModelConfig, **lengths) -> ModelConfig:
    return replace(config, **lengths)
