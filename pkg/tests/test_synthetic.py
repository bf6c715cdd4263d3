"""
Unit tests for the synthetic datasets of tweetrank/data/synthetic.py
"""

import os
import tempfile
import unittest as ut

from tweetrank.data.readers import read_corpus, read_qrels, read_run, read_topics, read_url_map
from tweetrank.data.synthetic import FILENAMES, SUFFIXES, SyntheticConfig, generate_synthetic, write_synthetic
from tweetrank.errors import ConfigError
from tweetrank.features.tokenizer import prepare_document, tokenize


def _small(signal, **kwargs):
    options = dict(
        signal=signal,
        num_train_queries=6,
        num_test_queries=3,
        docs_per_query=12,
        relevant_per_query=3,
        num_filler_words=120,
        num_background_docs=10,
        seed=11,
    )
    options.update(kwargs)
    return generate_synthetic(SyntheticConfig(**options))


def _posts_by_relevance(data):
    posts = {doc_id: (text, url) for doc_id, text, url in data.corpus}
    topics = {**data.train_topics, **data.test_topics}
    runs = {**data.train_run, **data.test_run}
    for query_id, query in topics.items():
        judgments = data.qrels[query_id]
        candidates = [doc_id for doc_id, _ in runs[query_id]]
        relevant = [posts[d] for d in candidates if judgments.get(d, 0) >= 1]
        others = [posts[d] for d in candidates if judgments.get(d, 0) == 0]
        yield tokenize(query), relevant, others


class test_SyntheticConfig(ut.TestCase):
    def test_invalid(self):
        invalid = [
            dict(signal="semantic"),
            dict(num_train_queries=0),
            dict(relevant_per_query=50, docs_per_query=50),
            dict(query_len=(1, 3)),
            dict(query_len=(3, 2)),
            dict(doc_len=(0, 4)),
            dict(num_filler_words=5, doc_len=(8, 12)),
        ]
        for options in invalid:
            with self.assertRaises(ConfigError):
                SyntheticConfig(**options)


class test_Synthetic(ut.TestCase):
    def test_deterministic(self):
        first, second = _small("mixed"), _small("mixed")
        self.assertListEqual(first.corpus, second.corpus)
        self.assertDictEqual(first.qrels, second.qrels)
        self.assertDictEqual(first.train_run, second.train_run)
        self.assertDictEqual(first.url_map, second.url_map)
        self.assertNotEqual(first.corpus, _small("mixed", seed=12).corpus)

    def test_sizes(self):
        data = _small("term")
        self.assertEqual(len(data.train_topics), 6)
        self.assertEqual(len(data.test_topics), 3)
        self.assertEqual(len(data.corpus), 9 * 12 + 10)
        self.assertEqual(len({doc_id for doc_id, _, _ in data.corpus}), len(data.corpus))
        for query_id, ranking in {**data.train_run, **data.test_run}.items():
            self.assertEqual(len(ranking), 12)
            scores = [score for _, score in ranking]
            self.assertListEqual(scores, sorted(scores, reverse=True))
            self.assertEqual(sum(grade >= 1 for grade in data.qrels[query_id].values()), 3)

    def test_term_signal(self):
        for terms, relevant, others in _posts_by_relevance(_small("term")):
            for text, _ in relevant:
                self.assertTrue(set(terms) <= set(tokenize(text)))
            for text, _ in others:
                self.assertFalse(set(terms) & set(tokenize(text)))

    def test_bigram_signal(self):
        for terms, relevant, others in _posts_by_relevance(_small("bigram", query_len=(3, 3))):
            phrase = (terms[0], terms[1])
            for text, _ in relevant:
                tokens = tokenize(text)
                self.assertIn(phrase, list(zip(tokens, tokens[1:])))
            num_apart = 0
            for text, _ in others:
                tokens = tokenize(text)
                self.assertNotIn(phrase, list(zip(tokens, tokens[1:])))
                num_apart += set(phrase) <= set(tokens)
            self.assertGreater(num_apart, 0)

    def test_morph_signal(self):
        for terms, relevant, _ in _posts_by_relevance(_small("morph")):
            for text, _ in relevant:
                tokens = set(tokenize(text))
                for term in terms:
                    self.assertNotIn(term, tokens)
                    self.assertTrue(any(term + suffix in tokens for suffix in SUFFIXES))

    def test_lengths_carry_no_signal(self):
        for signal in ("term", "bigram", "morph"):
            for _, relevant, others in _posts_by_relevance(_small(signal)):
                for text, _ in relevant + others:
                    self.assertTrue(8 <= len(tokenize(text)) <= 12, msg=f"{signal}: {text}")

    def test_url_signal(self):
        data = _small("url", short_url_fraction=0.5)
        self.assertGreater(len(data.url_map), 0)
        for terms, relevant, others in _posts_by_relevance(data):
            for text, url in relevant:
                doc = prepare_document("d", text, url, data.url_map)
                self.assertIn("-".join(terms), doc.url)
                self.assertFalse(set(terms) & set(doc.word_tokens))
            for text, url in others:
                doc = prepare_document("d", text, url, data.url_map)
                self.assertTrue(doc.url is None or "-".join(terms) not in doc.url)

    def test_write(self):
        data = _small("mixed")
        with tempfile.TemporaryDirectory() as tmpdir:
            paths = write_synthetic(data, os.path.join(tmpdir, "synthetic"))
            self.assertSetEqual(set(paths), set(FILENAMES))
            for path in paths.values():
                self.assertTrue(os.path.isfile(path))
            corpus = read_corpus(paths["corpus"], read_url_map(paths["url_map"]))
            self.assertEqual(len(corpus), len(data.corpus))
            self.assertListEqual(list(read_topics(paths["test_topics"])), list(data.test_topics))
            self.assertDictEqual(read_qrels(paths["qrels"]), data.qrels)
            train_run = read_run(paths["train_run"])
            for query_id, ranking in data.train_run.items():
                self.assertListEqual([d for d, _ in train_run[query_id]], [d for d, _ in ranking])


if __name__ == "__main__":
    ut.main()
