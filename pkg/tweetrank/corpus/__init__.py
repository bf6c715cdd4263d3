from .stats import (
    CollectionStats,
    build_stats,
    idf,
    phrase_weight,
    query_phrase_weights,
    save_stats,
    load_stats,
)
