"""
Document and collection frequencies of a background corpus, and the IDF
weights derived from them.

Word n-grams and character n-grams are keyed by their units joined with a
single space: `"bbc world"`, `"#bb bbc bc#"`.
"""

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Sequence, Union

import numpy as np
from loguru import logger
from tqdm import tqdm

from tweetrank.errors import DataFormatError, StatsError
from tweetrank.features.tokenizer import TokenizedDoc
from tweetrank.utils.fs import require_exists
from tweetrank.utils.read_file import file_opener

STATS_FORMAT = "tweetrank-stats"
STATS_VERSION = 1
KINDS = ("word", "char")

Gram = Union[str, Sequence[str]]


@dataclass
class CollectionStats:
    r"""
    Parameters:
        num_docs: Number of documents in the background corpus
        total_terms: Number of word tokens in the corpus, equal to `sum(cf.values())`
        n_max_w: Longest word n-gram counted in `word_df`
        n_max_c: Longest character n-gram counted in `char_df`
        word_df: Word n-gram -> number of documents containing it
        char_df: Character n-gram -> number of documents containing it
        cf: Word -> number of occurrences in the corpus
    """

    num_docs: int = 0
    total_terms: int = 0
    n_max_w: int = 3
    n_max_c: int = 5
    word_df: Dict[str, int] = field(default_factory=dict)
    char_df: Dict[str, int] = field(default_factory=dict)
    cf: Dict[str, int] = field(default_factory=dict)

    def df(self, gram: Gram, kind: str = "word") -> int:
        table = self._table(kind)
        return table.get(_key(gram), 0)

    def n_max(self, kind: str) -> int:
        self._table(kind)
        return self.n_max_w if kind == "word" else self.n_max_c

    def _table(self, kind: str) -> Dict[str, int]:
        if kind == "word":
            return self.word_df
        if kind == "char":
            return self.char_df
        raise ValueError(f"Unknown n-gram kind `{kind}`, expected one of {KINDS}")

    def validate(self):
        if self.total_terms != sum(self.cf.values()):
            raise StatsError(
                f"`total_terms`={self.total_terms} differs from the sum of collection frequencies"
            )
        for kind in KINDS:
            table = self._table(kind)
            if len(table) > 0 and max(table.values()) > self.num_docs:
                raise StatsError(f"A {kind} document frequency exceeds `num_docs`={self.num_docs}")
        return self


def _key(gram: Gram) -> str:
    if isinstance(gram, str):
        return gram
    return " ".join(gram)


def ngrams(units: Sequence[str], n: int) -> List[str]:
    """All contiguous n-grams of `units`, as space-joined keys."""
    return [" ".join(units[i : i + n]) for i in range(len(units) - n + 1)]


def build_stats(
    docs: Iterable[TokenizedDoc],
    n_max_w: int = 3,
    n_max_c: int = 5,
    progress: bool = True,
) -> CollectionStats:
    r"""
    Count document frequencies of word n-grams (n <= `n_max_w`) and of
    runs of consecutive character trigrams (n <= `n_max_c`), and collection
    frequencies of words, in a single pass over `docs`.

    URL trigrams are not counted.
    """
    if n_max_w < 1 or n_max_c < 1:
        raise StatsError(f"`n_max_w` and `n_max_c` must be >= 1, got {n_max_w} and {n_max_c}")

    word_df, char_df, cf = Counter(), Counter(), Counter()
    num_docs = 0
    for doc in tqdm(docs, desc="Counting n-grams", disable=not progress):
        num_docs += 1
        cf.update(doc.word_tokens)
        word_grams = set()
        for n in range(1, n_max_w + 1):
            word_grams.update(ngrams(doc.word_tokens, n))
        word_df.update(word_grams)
        char_grams = set()
        for n in range(1, n_max_c + 1):
            char_grams.update(ngrams(doc.char_trigrams, n))
        char_df.update(char_grams)

    if num_docs == 0:
        raise StatsError("Cannot build statistics from an empty corpus")

    stats = CollectionStats(
        num_docs=num_docs,
        total_terms=sum(cf.values()),
        n_max_w=n_max_w,
        n_max_c=n_max_c,
        word_df=dict(word_df),
        char_df=dict(char_df),
        cf=dict(cf),
    )
    logger.info(
        f"Collection statistics: {num_docs} documents, {stats.total_terms} terms, "
        f"{len(word_df)} word n-grams, {len(char_df)} char n-grams"
    )
    return stats


def idf(stats: CollectionStats, gram: Gram, kind: str = "word") -> float:
    r"""
    Smoothed inverse document frequency `ln((N + 1) / (df + 1))`.
    An unseen gram gets the largest value, `ln(N + 1)`.
    """
    return math.log((stats.num_docs + 1) / (stats.df(gram, kind) + 1))


def phrase_weight(stats: CollectionStats, grams: Sequence[str], layer_span: int, kind: str = "word") -> float:
    r"""
    Weight of a window of query units.

    Spans up to the indexed n-gram length use the IDF of the exact n-gram.
    Longer spans back off to the largest IDF of the window's unigrams.

    Parameters:
        stats: Collection statistics
        grams: The units of the window
        layer_span: Number of units covered by the window, >= 1
        kind: `"word"` or `"char"`
    """
    if layer_span < 1:
        raise ValueError(f"`layer_span` must be >= 1, got {layer_span}")
    if len(grams) == 0:
        return 0.0
    if layer_span <= stats.n_max(kind):
        return idf(stats, grams, kind)
    return max(idf(stats, gram, kind) for gram in grams)


def query_phrase_weights(
    tokens: Sequence[str],
    stats: CollectionStats,
    depth: int,
    k: int,
    kind: str,
    max_len: int,
) -> np.ndarray:
    r"""
    Phrase weights of every query position at every layer of a conv stack.

    At layer `h` the position `i` sees the window
    `[i - h * floor((k-1)/2), i + h * ceil((k-1)/2)]`, clipped to the real tokens.
    Its weight is `phrase_weight` of that window.

    Parameters:
        tokens: Query units, truncated to `max_len`
        stats: Collection statistics
        depth: Number of conv layers N
        k: Filter width of the stack
        kind: `"word"` or `"char"`
        max_len: Padded query length

    Returns:
        weights: [depth + 1 x max_len], zero on padded positions
    """
    tokens = list(tokens)[:max_len]
    left = (k - 1) // 2
    right = k - 1 - left
    weights = np.zeros((depth + 1, max_len), dtype=np.float64)
    cache = {}
    for h in range(depth + 1):
        for i in range(len(tokens)):
            lo = max(0, i - h * left)
            hi = min(len(tokens), i + h * right + 1)
            window = tuple(tokens[lo:hi])
            if window not in cache:
                cache[window] = phrase_weight(stats, window, len(window), kind)
            weights[h, i] = cache[window]
    return weights


def save_stats(stats: CollectionStats, path: str):
    r"""
    Write the statistics as text: a versioned header, the four counters,
    then `gram<TAB>df[<TAB>cf]` lines under `[word]` and `[char]` markers.
    Lines are sorted so identical statistics give identical files.
    """
    lines = [
        f"# {STATS_FORMAT} v{STATS_VERSION}",
        f"num_docs\t{stats.num_docs}",
        f"total_terms\t{stats.total_terms}",
        f"n_max_w\t{stats.n_max_w}",
        f"n_max_c\t{stats.n_max_c}",
        "[word]",
    ]
    for gram in sorted(stats.word_df):
        if gram in stats.cf:
            lines.append(f"{gram}\t{stats.word_df[gram]}\t{stats.cf[gram]}")
        else:
            lines.append(f"{gram}\t{stats.word_df[gram]}")
    lines.append("[char]")
    for gram in sorted(stats.char_df):
        lines.append(f"{gram}\t{stats.char_df[gram]}")
    with file_opener(path, "w") as f:
        f.write("\n".join(lines) + "\n")
    logger.info(f"Saved collection statistics to {path}")


def load_stats(path: str) -> CollectionStats:
    """Read statistics written by `save_stats`."""
    require_exists(path, what="statistics file")
    with file_opener(path, "r") as f:
        lines = f.read().split("\n")

    if lines[0] != f"# {STATS_FORMAT} v{STATS_VERSION}":
        raise DataFormatError(f"Unsupported statistics header `{lines[0]}`", path=path, line=1)

    counters = {}
    for lineno in range(2, 6):
        name, _, value = lines[lineno - 1].partition("\t") if len(lines) >= lineno else ("", "", "")
        if name not in ("num_docs", "total_terms", "n_max_w", "n_max_c") or not value.isdigit():
            raise DataFormatError("Expected `name<TAB>integer` counter", path=path, line=lineno)
        counters[name] = int(value)

    stats = CollectionStats(**counters)
    section = None
    for lineno, line in enumerate(lines[5:], start=6):
        if line == "":
            continue
        if line in ("[word]", "[char]"):
            section = line[1:-1]
            continue
        parts = line.split("\t")
        if section is None or len(parts) not in (2, 3) or not all(p.isdigit() for p in parts[1:]):
            raise DataFormatError(f"Malformed statistics line `{line}`", path=path, line=lineno)
        if section == "word":
            stats.word_df[parts[0]] = int(parts[1])
            if len(parts) == 3:
                stats.cf[parts[0]] = int(parts[2])
        else:
            stats.char_df[parts[0]] = int(parts[1])

    return stats.validate()
