from .readers import (
    Qrels,
    RankedRun,
    rank_scores,
    read_corpus,
    read_url_map,
    read_topics,
    read_qrels,
    read_run,
    write_run,
    write_qrels,
)
from .collate import EncodedPair, PaddedBatch, collate, iterate_batches
from .dataset import (
    QueryGroup,
    PairEncoder,
    build_groups,
    check_trainable,
    compute_max_lengths,
    resolve_max_lengths,
    split_queries,
    labels_as_qrels,
)
from .synthetic import SyntheticConfig, SyntheticDataset, generate_synthetic, write_synthetic
