"""
Unit tests for the tokenizer, vocabulary and embeddings of tweetrank/features/...
"""

import os
import tempfile
import unittest as ut

import numpy as np
import pytest

from tweetrank.errors import DataFormatError
from tweetrank.features.embeddings import load_pretrained_embeddings
from tweetrank.features.tokenizer import (
    MAX_URL_CHARS,
    URL_PLACEHOLDER,
    char_trigrams,
    normalize_url,
    prepare_document,
    prepare_query,
    tokenize,
    url_to_trigrams,
    word_char_trigrams,
)
from tweetrank.features.vocabulary import OOV_ID, PAD_ID, Vocabulary, encode_and_pad

from tests.helpers import URL_MAP, tiny_corpus, tiny_topics


class test_Tokenizer(ut.TestCase):
    def test_tokenize(self):
        self.assertListEqual(
            tokenize("BBC slashes online budget #bbcnews"), ["bbc", "slashes", "online", "budget", "bbcnews"]
        )
        self.assertListEqual(tokenize("@user hello"), ["hello"])
        self.assertListEqual(tokenize("Chrome-OS, finally!"), ["chrome-os", "finally"])
        self.assertListEqual(tokenize("café time"), ["caf", "time"])
        self.assertListEqual(tokenize(""), [])
        self.assertListEqual(tokenize(None), [])

    def test_tokenize_idempotent(self):
        texts = ["BBC slashes online budget #bbcnews", "@a don't STOP me-now!!", "  x_y   z  "]
        for text in texts:
            tokens = tokenize(text)
            self.assertListEqual(tokenize(" ".join(tokens)), tokens)

    def test_char_trigrams(self):
        self.assertListEqual(char_trigrams("hello"), ["#he", "hel", "ell", "llo", "lo#"])
        self.assertListEqual(char_trigrams("ab"), ["#ab", "ab#"])
        self.assertListEqual(char_trigrams("a"), ["#a#"])
        self.assertListEqual(char_trigrams(""), [])
        for token in ["a", "ab", "hello", "bbcnews"]:
            self.assertEqual(len(char_trigrams(token)), len(token))

    def test_trigrams_never_span_words(self):
        trigrams = word_char_trigrams(["ab", "cd"])
        self.assertListEqual(trigrams, ["#ab", "ab#", "#cd", "cd#"])

    def test_normalize_url(self):
        self.assertEqual(
            normalize_url("http://bbc-world-service-to-cut-staff.html"), "bbc-world-service-to-cut-staff.html"
        )
        self.assertEqual(normalize_url("HTTPS://Example.com/A B"), "example.com/ab")
        self.assertEqual(normalize_url(None), URL_PLACEHOLDER)
        self.assertEqual(normalize_url("   "), URL_PLACEHOLDER)
        self.assertEqual(url_to_trigrams(None), ["#<u", "<ur", "url", "rl>", "l>#"])

    def test_long_url(self):
        url = "http://" + "a" * 300
        self.assertEqual(len(normalize_url(url)), MAX_URL_CHARS)
        self.assertEqual(len(url_to_trigrams(url)), MAX_URL_CHARS)

    def test_prepare_document(self):
        doc = prepare_document("103", "@user cooking pasta at home tonight http://t.co/abc", None, URL_MAP)
        self.assertListEqual(doc.word_tokens, ["cooking", "pasta", "at", "home", "tonight"])
        self.assertEqual(doc.url, "http://recipes.example.com/pasta-night")
        self.assertListEqual(doc.url_trigrams, char_trigrams("recipes.example.com/pasta-night"))
        self.assertEqual(len(doc.char_trigrams), sum(len(t) for t in doc.word_tokens))

        # The URL column wins over the inline link
        doc = prepare_document("1", "read http://t.co/abc", "http://t.co/def", URL_MAP)
        self.assertEqual(doc.url, "http://food.example.com/quick-pasta-recipes")
        self.assertListEqual(doc.word_tokens, ["read"])

        # Unknown short links are kept as they are
        doc = prepare_document("2", "no map", "http://t.co/zzz", URL_MAP)
        self.assertEqual(doc.url, "http://t.co/zzz")

    def test_prepare_empty(self):
        doc = prepare_document("3", "@only @mentions", None)
        self.assertTrue(doc.is_empty)
        self.assertListEqual(doc.char_trigrams, [])
        self.assertListEqual(doc.url_trigrams, url_to_trigrams(None))

    def test_prepare_query(self):
        query = prepare_query("MB01", "BBC world service cuts")
        self.assertListEqual(query.word_tokens, ["bbc", "world", "service", "cuts"])
        self.assertEqual(len(query.char_trigrams), 3 + 5 + 7 + 4)
        self.assertListEqual(query.url_trigrams, [])


class test_Vocabulary(ut.TestCase):
    def _vocab(self):
        vocab = Vocabulary(embedding_dim=4)
        vocab.add_tokens(["a", "b"], "word")
        return vocab

    def test_dense_ids(self):
        vocab = self._vocab()
        self.assertEqual(vocab.token_id("a"), 2)
        self.assertEqual(vocab.token_id("b"), 3)
        self.assertEqual(vocab.num_words, 4)
        self.assertListEqual(vocab.id_to_token("word"), ["<pad>", "<oov>", "a", "b"])

    def test_encode_and_pad(self):
        vocab = self._vocab().freeze()
        ids, mask = encode_and_pad(["a", "b"], vocab, 4)
        np.testing.assert_array_equal(ids, [2, 3, PAD_ID, PAD_ID])
        np.testing.assert_array_equal(mask, [1, 1, 0, 0])

        ids, mask = encode_and_pad(["a", "b", "a"], vocab, 2)
        np.testing.assert_array_equal(ids, [2, 3])
        np.testing.assert_array_equal(mask, [1, 1])

        ids, mask = encode_and_pad(["zzz"], vocab, 2)
        np.testing.assert_array_equal(ids, [OOV_ID, PAD_ID])
        np.testing.assert_array_equal(mask, [1, 0])

        ids, mask = encode_and_pad([], vocab, 3)
        np.testing.assert_array_equal(mask, [0, 0, 0])
        ids, mask = encode_and_pad([], vocab, 3, empty_as_oov=True)
        np.testing.assert_array_equal(ids, [OOV_ID, PAD_ID, PAD_ID])
        np.testing.assert_array_equal(mask, [1, 0, 0])

    def test_unfrozen_allocates(self):
        vocab = self._vocab()
        ids, _ = encode_and_pad(["c"], vocab, 1)
        np.testing.assert_array_equal(ids, [4])
        self.assertIn(("c", "word"), vocab)

    def test_build(self):
        docs = list(tiny_corpus().values()) + list(tiny_topics().values())
        vocab = Vocabulary.build(docs, embedding_dim=4)
        self.assertTrue(vocab.frozen)
        self.assertIn(("bbc", "word"), vocab)
        self.assertIn(("#bb", "trigram"), vocab)
        self.assertIn(("rec", "trigram"), vocab)
        self.assertEqual(vocab.token_id("never-seen"), OOV_ID)

    def test_save_load(self):
        docs = list(tiny_corpus().values())
        vocab = Vocabulary.build(docs, embedding_dim=4)
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, "vocab.tsv")
            vocab.save(path)
            loaded = Vocabulary.load(path)
        self.assertEqual(loaded, vocab)
        self.assertEqual(loaded.hash, vocab.hash)
        self.assertTrue(loaded.frozen)

    def test_hash(self):
        vocab = self._vocab()
        other = self._vocab()
        self.assertEqual(vocab.hash, other.hash)
        other.add_tokens(["c"])
        self.assertNotEqual(vocab.hash, other.hash)
        self.assertNotEqual(vocab.hash, Vocabulary(embedding_dim=5, word_to_id=vocab.word_to_id).hash)

    def test_bad_file(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, "vocab.tsv")
            with open(path, "w") as f:
                f.write("# tweetrank-vocab v1\tembedding_dim=4\tpad=0\toov=1\n[word]\na\tx\n")
            with self.assertRaises(DataFormatError) as ctx:
                Vocabulary.load(path)
        self.assertEqual(ctx.exception.line, 3)


def test_pretrained_embeddings(datadir):
    docs = list(tiny_corpus().values()) + list(tiny_topics().values())
    vocab = Vocabulary.build(docs, embedding_dim=4)
    table, num_found = load_pretrained_embeddings(
        str(datadir / "tiny" / "embeddings.txt"), vocab, np.random.default_rng(0)
    )
    assert num_found == 2
    assert table.shape == (vocab.num_words, 4)
    np.testing.assert_array_equal(table[vocab.token_id("bbc")], [0.1, 0.2, 0.3, 0.4])
    np.testing.assert_array_equal(table[vocab.token_id("world")], [0.5, 0.6, 0.7, 0.8])
    np.testing.assert_array_equal(table[PAD_ID], np.zeros(4))
    others = np.delete(table, [PAD_ID, vocab.token_id("bbc"), vocab.token_id("world")], axis=0)
    assert np.all((others >= 0.0) & (others <= 0.1))


def test_pretrained_embeddings_wrong_dim(datadir):
    vocab = Vocabulary.build(tiny_corpus().values(), embedding_dim=5)
    with pytest.raises(DataFormatError) as err:
        load_pretrained_embeddings(str(datadir / "tiny" / "embeddings.txt"), vocab, np.random.default_rng(0))
    assert err.value.line == 1


if __name__ == "__main__":
    ut.main()
