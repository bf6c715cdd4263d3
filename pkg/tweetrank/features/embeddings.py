from typing import Optional, Tuple

import numpy as np
from loguru import logger

from tweetrank.errors import DataFormatError
from tweetrank.features.vocabulary import PAD_ID, Vocabulary
from tweetrank.utils.fs import require_exists
from tweetrank.utils.read_file import file_opener

INIT_LOW = 0.0
INIT_HIGH = 0.1


def init_embedding_table(num_rows: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    r"""
    Embedding table [num_rows x dim] drawn uniformly in [0, 0.1],
    with the padding row fixed at zero.
    """
    table = rng.uniform(INIT_LOW, INIT_HIGH, size=(num_rows, dim))
    table[PAD_ID] = 0.0
    return table


def load_pretrained_embeddings(
    path: str,
    vocab: Vocabulary,
    rng: np.random.Generator,
    kind: str = "word",
    dim: Optional[int] = None,
) -> Tuple[np.ndarray, int]:
    r"""
    Initialize an embedding table from a word2vec text file.

    Each line is `token v1 ... vL`, optionally preceded by a `count dim` header.
    Tokens of the vocabulary found in the file take their pretrained vector,
    every other row is uniform in [0, 0.1] and the padding row is zero.

    Parameters:
        path: word2vec text file, optionally `.gz`
        vocab: The vocabulary whose rows are filled
        rng: Generator for the rows missing from the file
        kind: `"word"` or `"trigram"`
        dim: Embedding dimension, defaults to `vocab.embedding_dim`

    Returns:
        table: [vocab.size(kind) x dim]
        num_found: Number of vocabulary tokens found in the file
    """
    require_exists(path, what="pretrained embedding file")
    dim = vocab.embedding_dim if dim is None else dim
    table = init_embedding_table(vocab.size(kind), dim, rng)
    token_to_id = vocab.word_to_id if kind == "word" else vocab.trigram_to_id

    num_found = 0
    with file_opener(path, "r") as f:
        for lineno, line in enumerate(f, start=1):
            parts = line.rstrip("\n").rstrip().split(" ")
            if len(parts) == 0 or parts == [""]:
                continue
            if lineno == 1 and len(parts) == 2 and all(p.isdigit() for p in parts):
                if int(parts[1]) != dim:
                    raise DataFormatError(
                        f"Embedding dimension {parts[1]} does not match the expected {dim}", path=path, line=1
                    )
                continue
            if len(parts) != dim + 1:
                raise DataFormatError(
                    f"Expected a token followed by {dim} values, got {len(parts) - 1} values",
                    path=path,
                    line=lineno,
                )
            idx = token_to_id.get(parts[0])
            if idx is None:
                continue
            try:
                table[idx] = np.asarray(parts[1:], dtype=np.float64)
            except ValueError:
                raise DataFormatError("Non-numeric embedding value", path=path, line=lineno)
            num_found += 1

    logger.info(f"Found {num_found}/{len(token_to_id)} {kind} embeddings in {path}")
    return table, num_found
