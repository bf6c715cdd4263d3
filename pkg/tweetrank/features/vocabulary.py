"""
Bidirectional token <-> id maps for words and character trigrams.

Ids 0 and 1 are reserved for padding and for unseen tokens of a frozen
vocabulary. Real tokens get dense ids starting at 2, in insertion order.
"""

from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from tweetrank.errors import DataFormatError
from tweetrank.features.tokenizer import TokenizedDoc
from tweetrank.utils.fs import require_exists
from tweetrank.utils.hashing import get_md5_hash
from tweetrank.utils.read_file import file_opener

PAD_ID = 0
OOV_ID = 1
FIRST_ID = 2
PAD_TOKEN = "<pad>"
OOV_TOKEN = "<oov>"

VOCAB_FORMAT = "tweetrank-vocab"
VOCAB_VERSION = 1
KINDS = ("word", "trigram")


class Vocabulary:
    def __init__(
        self,
        embedding_dim: int = 50,
        word_to_id: Optional[Dict[str, int]] = None,
        trigram_to_id: Optional[Dict[str, int]] = None,
        frozen: bool = False,
    ):
        r"""
        Parameters:
            embedding_dim: Dimension L of the word and trigram embeddings
            word_to_id: Existing word ids, dense from 2
            trigram_to_id: Existing trigram ids, dense from 2
            frozen: When frozen, unseen tokens map to the OOV id instead of a new id
        """
        if embedding_dim < 1:
            raise ValueError(f"`embedding_dim` must be >= 1, got {embedding_dim}")
        self.embedding_dim = int(embedding_dim)
        self._maps: Dict[str, Dict[str, int]] = {
            "word": dict(word_to_id or {}),
            "trigram": dict(trigram_to_id or {}),
        }
        for kind, mapping in self._maps.items():
            _check_dense(mapping, kind)
        self.frozen = frozen

    @classmethod
    def build(cls, docs: Iterable[TokenizedDoc], embedding_dim: int = 50) -> "Vocabulary":
        """Allocate ids for every word and trigram of `docs` (posts, queries and URLs), then freeze."""
        vocab = cls(embedding_dim=embedding_dim)
        for doc in docs:
            vocab.add_tokens(doc.word_tokens, "word")
            vocab.add_tokens(doc.char_trigrams, "trigram")
            vocab.add_tokens(doc.url_trigrams, "trigram")
        vocab.freeze()
        logger.info(f"Built vocabulary with {vocab.num_words} word and {vocab.num_trigrams} trigram rows")
        return vocab

    def freeze(self) -> "Vocabulary":
        self.frozen = True
        return self

    def _mapping(self, kind: str) -> Dict[str, int]:
        if kind not in self._maps:
            raise ValueError(f"Unknown token kind `{kind}`, expected one of {KINDS}")
        return self._maps[kind]

    def add_tokens(self, tokens: Iterable[str], kind: str = "word"):
        mapping = self._mapping(kind)
        for token in tokens:
            if token not in mapping:
                mapping[token] = FIRST_ID + len(mapping)

    def token_id(self, token: str, kind: str = "word") -> int:
        r"""
        Id of `token`. On a frozen vocabulary an unseen token gets `OOV_ID`,
        otherwise it is allocated a fresh id.
        """
        mapping = self._mapping(kind)
        idx = mapping.get(token)
        if idx is not None:
            return idx
        if self.frozen:
            return OOV_ID
        idx = FIRST_ID + len(mapping)
        mapping[token] = idx
        return idx

    def id_to_token(self, kind: str = "word") -> List[str]:
        """Tokens indexed by id, including the two reserved ids."""
        tokens = [PAD_TOKEN, OOV_TOKEN] + [""] * len(self._mapping(kind))
        for token, idx in self._mapping(kind).items():
            tokens[idx] = token
        return tokens

    def size(self, kind: str = "word") -> int:
        """Number of embedding rows, reserved ids included."""
        return FIRST_ID + len(self._mapping(kind))

    @property
    def num_words(self) -> int:
        return self.size("word")

    @property
    def num_trigrams(self) -> int:
        return self.size("trigram")

    @property
    def word_to_id(self) -> Dict[str, int]:
        return dict(self._maps["word"])

    @property
    def trigram_to_id(self) -> Dict[str, int]:
        return dict(self._maps["trigram"])

    def __contains__(self, item: Tuple[str, str]) -> bool:
        token, kind = item
        return token in self._mapping(kind)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return (self.embedding_dim == other.embedding_dim) and (self._maps == other._maps)

    @property
    def hash(self) -> str:
        """MD5 of the embedding dimension and the id assignments."""
        return get_md5_hash(
            {
                "embedding_dim": self.embedding_dim,
                "word": self.id_to_token("word"),
                "trigram": self.id_to_token("trigram"),
            }
        )

    def save(self, path: str):
        r"""
        Write the vocabulary as text: a header line carrying the format
        version, `L` and the reserved ids, then one `token<TAB>id` line per
        token in id order under `[word]` and `[trigram]` section markers.
        """
        lines = [
            f"# {VOCAB_FORMAT} v{VOCAB_VERSION}\tembedding_dim={self.embedding_dim}"
            f"\tpad={PAD_ID}\toov={OOV_ID}"
        ]
        for kind in KINDS:
            lines.append(f"[{kind}]")
            for idx, token in enumerate(self.id_to_token(kind)[FIRST_ID:], start=FIRST_ID):
                lines.append(f"{token}\t{idx}")
        with file_opener(path, "w") as f:
            f.write("\n".join(lines) + "\n")
        logger.info(f"Saved vocabulary to {path}")

    @classmethod
    def load(cls, path: str) -> "Vocabulary":
        """Read a vocabulary written by `save`. The result is frozen."""
        require_exists(path, what="vocabulary file")
        with file_opener(path, "r") as f:
            lines = f.read().split("\n")
        if len(lines) == 0:
            raise DataFormatError("Empty vocabulary file", path=path)

        header = lines[0].split("\t")
        if header[0] != f"# {VOCAB_FORMAT} v{VOCAB_VERSION}":
            raise DataFormatError(f"Unsupported vocabulary header `{header[0]}`", path=path, line=1)
        fields = dict(item.split("=", 1) for item in header[1:] if "=" in item)
        try:
            embedding_dim = int(fields["embedding_dim"])
        except (KeyError, ValueError):
            raise DataFormatError("Missing or invalid `embedding_dim` in header", path=path, line=1)
        if int(fields.get("pad", PAD_ID)) != PAD_ID or int(fields.get("oov", OOV_ID)) != OOV_ID:
            raise DataFormatError("Unsupported reserved ids in header", path=path, line=1)

        maps = {kind: {} for kind in KINDS}
        section = None
        for lineno, line in enumerate(lines[1:], start=2):
            if line == "":
                continue
            if "\t" not in line and line.startswith("[") and line.endswith("]"):
                section = line[1:-1]
                if section not in maps:
                    raise DataFormatError(f"Unknown section `{line}`", path=path, line=lineno)
                continue
            if section is None:
                raise DataFormatError("Token line before any section marker", path=path, line=lineno)
            token, _, idx = line.rpartition("\t")
            if token == "" or not idx.isdigit():
                raise DataFormatError(f"Expected `token<TAB>id`, got `{line}`", path=path, line=lineno)
            maps[section][token] = int(idx)

        try:
            vocab = cls(embedding_dim, word_to_id=maps["word"], trigram_to_id=maps["trigram"], frozen=True)
        except ValueError as err:
            raise DataFormatError(str(err), path=path)
        return vocab


def _check_dense(mapping: Dict[str, int], kind: str):
    ids = sorted(mapping.values())
    if ids != list(range(FIRST_ID, FIRST_ID + len(ids))):
        raise ValueError(f"The {kind} ids must be dense and start at {FIRST_ID}")


def encode_and_pad(
    tokens: Sequence[str],
    vocab: Vocabulary,
    max_len: int,
    kind: str = "word",
    empty_as_oov: bool = False,
) -> Tuple[np.ndarray, np.ndarray]:
    r"""
    Map tokens to ids, truncate to `max_len` and pad with `PAD_ID`.

    Parameters:
        tokens: Tokens to encode
        vocab: Vocabulary. Unseen tokens get a fresh id unless it is frozen.
        max_len: Length of the output vectors, >= 1
        kind: `"word"` or `"trigram"`
        empty_as_oov: Encode an empty token list as a single OOV token, so the
            mask is never all zeros

    Returns:
        ids: int64 vector [max_len]
        mask: float64 vector [max_len], 1 exactly on the non-PAD positions
    """
    if max_len < 1:
        raise ValueError(f"`max_len` must be >= 1, got {max_len}")
    ids = np.full(max_len, PAD_ID, dtype=np.int64)
    mask = np.zeros(max_len, dtype=np.float64)
    kept = list(tokens)[:max_len]
    for i, token in enumerate(kept):
        ids[i] = vocab.token_id(token, kind)
    if len(kept) == 0 and empty_as_oov:
        ids[0] = OOV_ID
    mask[ids != PAD_ID] = 1.0
    return ids, mask
