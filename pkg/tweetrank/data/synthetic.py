"""
Seeded generator of small reranking datasets with a planted relevance signal.

Every query owns a few topic words that appear nowhere else. Its candidates
are relevant posts carrying the signal and non-relevant posts made of filler
words. Signals:

- `term`: relevant posts contain the query words
- `bigram`: relevant posts contain the first two query words as an adjacent
  phrase, half of the non-relevant posts contain them apart
- `morph`: relevant posts contain suffixed variants of the query words
- `url`: relevant posts link to a URL made of the query words, some of them
  through a shortened link resolved by the URL map
- `mixed`: one of the four above, drawn per query

Relevant and non-relevant posts share one length distribution.
"""

from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

import numpy as np
from loguru import logger

from tweetrank.data.readers import Qrels, RankedRun, rank_scores, write_qrels, write_run
from tweetrank.errors import ConfigError
from tweetrank.utils.fs import join, mkdir
from tweetrank.utils.read_file import file_opener

SIGNALS = ("term", "bigram", "morph", "url", "mixed")
SUFFIXES = ("s", "ing", "ed", "er")
_CONSONANTS = "bcdfghklmnprstvz"
_VOWELS = "aeiou"

FILENAMES = {
    "corpus": "corpus.tsv",
    "url_map": "url_map.tsv",
    "train_topics": "topics.train.tsv",
    "test_topics": "topics.test.tsv",
    "qrels": "qrels.txt",
    "train_run": "run.train.txt",
    "test_run": "run.test.txt",
}


@dataclass
class SyntheticConfig:
    r"""
    Parameters:
        signal: One of `term`, `bigram`, `morph`, `url`, `mixed`
        num_train_queries: Queries of the training topics
        num_test_queries: Queries of the test topics
        docs_per_query: Candidates per query in the runs
        relevant_per_query: Relevant candidates per query
        query_len: Inclusive range of the number of query words, at least 2
        doc_len: Inclusive range of the number of filler words per post
        num_filler_words: Size of the filler vocabulary
        num_background_docs: Extra posts of the corpus that are no candidate
        judged_fraction: Share of the non-relevant candidates judged as non-relevant
        url_fraction: Share of the posts carrying an unrelated URL
        short_url_fraction: Share of the URLs written as a shortened link
        mention_rate: Share of the posts starting with a mention
        seed: Seed of the generator
    """

    signal: str = "term"
    num_train_queries: int = 20
    num_test_queries: int = 10
    docs_per_query: int = 50
    relevant_per_query: int = 5
    query_len: Tuple[int, int] = (2, 3)
    doc_len: Tuple[int, int] = (8, 12)
    num_filler_words: int = 400
    num_background_docs: int = 200
    judged_fraction: float = 0.6
    url_fraction: float = 0.3
    short_url_fraction: float = 0.3
    mention_rate: float = 0.1
    seed: int = 42

    def __post_init__(self):
        if self.signal not in SIGNALS:
            raise ConfigError(f"Unknown signal `{self.signal}`, expected one of {SIGNALS}")
        if self.num_train_queries < 1 or self.num_test_queries < 0:
            raise ConfigError("At least one training query is required")
        if not (1 <= self.relevant_per_query < self.docs_per_query):
            raise ConfigError("`relevant_per_query` must be in [1, docs_per_query)")
        if not (2 <= self.query_len[0] <= self.query_len[1]):
            raise ConfigError(f"`query_len` must be an increasing range from 2 or more, got {self.query_len}")
        if not (1 <= self.doc_len[0] <= self.doc_len[1]):
            raise ConfigError(f"`doc_len` must be an increasing range from 1 or more, got {self.doc_len}")
        if self.num_filler_words < self.doc_len[1]:
            raise ConfigError("`num_filler_words` must be at least the longest post")


@dataclass
class SyntheticDataset:
    corpus: List[Tuple[str, str, str]] = field(default_factory=list)
    url_map: Dict[str, str] = field(default_factory=dict)
    train_topics: Dict[str, str] = field(default_factory=OrderedDict)
    test_topics: Dict[str, str] = field(default_factory=OrderedDict)
    qrels: Qrels = field(default_factory=dict)
    train_run: RankedRun = field(default_factory=dict)
    test_run: RankedRun = field(default_factory=dict)
    signals: Dict[str, str] = field(default_factory=dict)


def make_words(rng: np.random.Generator, count: int, taken: Set[str]) -> List[str]:
    """`count` new pronounceable lowercase words of 2 or 3 syllables, none of them in `taken`."""
    words = []
    while len(words) < count:
        num_syllables = rng.integers(2, 4)
        syllables = [rng.choice(list(_CONSONANTS)) + rng.choice(list(_VOWELS)) for _ in range(num_syllables)]
        word = "".join(syllables)
        if word not in taken:
            taken.add(word)
            words.append(word)
    return words


class _Generator:
    def __init__(self, config: SyntheticConfig):
        self.config = config
        self.rng = np.random.default_rng(config.seed)
        self.taken: Set[str] = set()
        self.fillers = make_words(self.rng, config.num_filler_words, self.taken)
        self.next_doc = 0
        self.next_link = 0
        self.data = SyntheticDataset()

    def doc_id(self) -> str:
        self.next_doc += 1
        return f"{300000000 + self.next_doc}"

    def filler(self, count: int) -> List[str]:
        return [str(w) for w in self.rng.choice(self.fillers, size=count, replace=False)]

    def filler_len(self) -> int:
        low, high = self.config.doc_len
        return int(self.rng.integers(low, high + 1))

    def insert(self, words: List[str], extra: List[str]) -> List[str]:
        """Insert every word of `extra` at a random position of `words`."""
        words = list(words)
        for word in extra:
            words.insert(int(self.rng.integers(0, len(words) + 1)), word)
        return words

    def decorate(self, words: List[str]) -> str:
        r"""Occasional mention and hashtag, which the tokenizer removes or unwraps."""
        words = list(words)
        if self.rng.random() < 0.2:
            pos = int(self.rng.integers(0, len(words)))
            words[pos] = "#" + words[pos]
        if self.rng.random() < self.config.mention_rate:
            words.insert(0, "@" + self.filler(1)[0])
        return " ".join(words)

    def url(self, words: List[str]) -> str:
        """URL made of `words`, written as a shortened link from time to time."""
        site = self.filler(1)[0]
        url = f"http://www.{site}.com/{'-'.join(words)}.html"
        if self.rng.random() < self.config.short_url_fraction:
            self.next_link += 1
            short = f"http://t.co/x{self.next_link:05d}"
            self.data.url_map[short] = url
            return short
        return url

    def unrelated_url(self) -> str:
        if self.rng.random() < self.config.url_fraction:
            return self.url(self.filler(int(self.rng.integers(2, 5))))
        return ""

    def filler_around(self, num_planted: int, minimum: int = 1) -> List[str]:
        r"""Filler of a post receiving `num_planted` more words, keeping its length in `doc_len`."""
        return self.filler(max(self.filler_len() - num_planted, minimum))

    def relevant_post(self, signal: str, terms: List[str]) -> Tuple[str, str]:
        words = self.filler_around(0 if signal == "url" else len(terms))
        if signal == "term":
            return self.decorate(self.insert(words, terms)), self.unrelated_url()
        if signal == "bigram":
            words = self.insert(words, terms[2:])
            pos = int(self.rng.integers(0, len(words) + 1))
            return self.decorate(words[:pos] + terms[:2] + words[pos:]), self.unrelated_url()
        if signal == "morph":
            variants = [term + str(self.rng.choice(SUFFIXES)) for term in terms]
            return self.decorate(self.insert(words, variants)), self.unrelated_url()
        return self.decorate(words), self.url(terms)

    def bigram_negative(self, terms: List[str]) -> str:
        r"""Post with the first two query words at least two positions apart."""
        words = self.filler_around(len(terms), minimum=2)
        i = int(self.rng.integers(0, len(words) - 1))
        j = int(self.rng.integers(i + 2, len(words) + 2))
        first, second = (terms[0], terms[1]) if self.rng.random() < 0.5 else (terms[1], terms[0])
        words = words[:i] + [first] + words[i : j - 1] + [second] + words[j - 1 :]
        return self.decorate(self.insert(words, terms[2:]))

    def query(self, query_id: str):
        config = self.config
        signal = config.signal
        if signal == "mixed":
            signal = str(self.rng.choice(SIGNALS[:-1]))
        num_terms = int(self.rng.integers(config.query_len[0], config.query_len[1] + 1))
        terms = make_words(self.rng, num_terms, self.taken)

        posts = []
        for _ in range(config.relevant_per_query):
            text, url = self.relevant_post(signal, terms)
            posts.append((self.doc_id(), text, url, int(self.rng.choice([1, 2]))))
        for ii in range(config.docs_per_query - config.relevant_per_query):
            if signal == "bigram" and ii % 2 == 0:
                text = self.bigram_negative(terms)
            else:
                text = self.decorate(self.filler(self.filler_len()))
            grade = 0 if self.rng.random() < config.judged_fraction else None
            posts.append((self.doc_id(), text, self.unrelated_url(), grade))

        order = self.rng.permutation(len(posts))
        scores = np.sort(self.rng.uniform(0.0, 20.0, size=len(posts)))[::-1]
        run = {posts[idx][0]: float(np.round(score, 6)) for idx, score in zip(order, scores)}
        judgments = {doc_id: grade for doc_id, _, _, grade in posts if grade is not None}
        self.data.corpus.extend((doc_id, text, url) for doc_id, text, url, _ in posts)
        self.data.qrels[query_id] = judgments
        self.data.signals[query_id] = signal
        return " ".join(terms), rank_scores(run)

    def generate(self) -> SyntheticDataset:
        config = self.config
        total = config.num_train_queries + config.num_test_queries
        for idx in range(total):
            query_id = f"SY{idx + 1:03d}"
            text, run = self.query(query_id)
            if idx < config.num_train_queries:
                self.data.train_topics[query_id] = text
                self.data.train_run[query_id] = run
            else:
                self.data.test_topics[query_id] = text
                self.data.test_run[query_id] = run
        for _ in range(config.num_background_docs):
            text = self.decorate(self.filler(self.filler_len()))
            self.data.corpus.append((self.doc_id(), text, self.unrelated_url()))
        return self.data


def generate_synthetic(config: Optional[SyntheticConfig] = None) -> SyntheticDataset:
    """Generate a dataset. The same config always gives the same dataset."""
    config = SyntheticConfig() if config is None else config
    data = _Generator(config).generate()
    logger.info(
        f"Generated {len(data.train_topics)} training and {len(data.test_topics)} test queries "
        f"with the `{config.signal}` signal over {len(data.corpus)} posts"
    )
    return data


def _write_tsv(rows, path: str):
    with file_opener(path, "w") as f:
        f.write("".join("\t".join(row) + "\n" for row in rows))


def write_synthetic(data: SyntheticDataset, output_dir: str) -> Dict[str, str]:
    """Write every file of `data` under `output_dir` and return their paths by role."""
    mkdir(output_dir)
    paths = {role: join(output_dir, name) for role, name in FILENAMES.items()}
    _write_tsv(data.corpus, paths["corpus"])
    _write_tsv(sorted(data.url_map.items()), paths["url_map"])
    _write_tsv(data.train_topics.items(), paths["train_topics"])
    _write_tsv(data.test_topics.items(), paths["test_topics"])
    write_qrels(data.qrels, paths["qrels"])
    write_run(data.train_run, paths["train_run"], tag="firststage")
    write_run(data.test_run, paths["test_run"], tag="firststage")
    return paths
