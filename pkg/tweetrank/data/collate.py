from dataclasses import dataclass, field, fields
from typing import List, Optional, Sequence

import numpy as np


@dataclass
class EncodedPair:
    r"""
    One query-post pair, encoded and padded against a frozen vocabulary.

    Id vectors are int64, masks and weights float64. `word_weights` and
    `char_weights` hold the query phrase weights of every layer,
    [depth + 1 x query length].
    """

    query_id: str
    doc_id: str
    label: int
    query_word_ids: np.ndarray
    query_word_mask: np.ndarray
    doc_word_ids: np.ndarray
    doc_word_mask: np.ndarray
    query_tri_ids: np.ndarray
    query_tri_mask: np.ndarray
    doc_tri_ids: np.ndarray
    doc_tri_mask: np.ndarray
    url_tri_ids: np.ndarray
    url_tri_mask: np.ndarray
    word_weights: np.ndarray
    char_weights: np.ndarray


ARRAY_FIELDS = [f.name for f in fields(EncodedPair) if f.name not in ("query_id", "doc_id", "label")]


@dataclass
class PaddedBatch:
    r"""
    A mini-batch of B pairs: every array of `EncodedPair` stacked on a leading
    batch axis, plus the labels [B] and the identifiers of each row.
    """

    query_word_ids: np.ndarray
    query_word_mask: np.ndarray
    doc_word_ids: np.ndarray
    doc_word_mask: np.ndarray
    query_tri_ids: np.ndarray
    query_tri_mask: np.ndarray
    doc_tri_ids: np.ndarray
    doc_tri_mask: np.ndarray
    url_tri_ids: np.ndarray
    url_tri_mask: np.ndarray
    word_weights: np.ndarray
    char_weights: np.ndarray
    labels: np.ndarray
    query_ids: List[str] = field(default_factory=list)
    doc_ids: List[str] = field(default_factory=list)

    def __len__(self) -> int:
        return int(self.labels.shape[0])


def collate(pairs: Sequence[EncodedPair]) -> PaddedBatch:
    """Stack encoded pairs of identical padded lengths into a `PaddedBatch`."""
    if len(pairs) == 0:
        raise ValueError("Cannot collate an empty list of pairs")
    arrays = {name: np.stack([getattr(p, name) for p in pairs]) for name in ARRAY_FIELDS}
    return PaddedBatch(
        **arrays,
        labels=np.asarray([p.label for p in pairs], dtype=np.int64),
        query_ids=[p.query_id for p in pairs],
        doc_ids=[p.doc_id for p in pairs],
    )


def iterate_batches(pairs: Sequence[EncodedPair], batch_size: int, order: Optional[Sequence[int]] = None):
    """Yield `PaddedBatch` of at most `batch_size` pairs, in `order` when given."""
    order = list(range(len(pairs)) if order is None else order)
    for start in range(0, len(order), batch_size):
        yield collate([pairs[i] for i in order[start : start + batch_size]])
