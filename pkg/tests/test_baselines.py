"""
Unit tests for the query likelihood and score interpolation of tweetrank/baselines/...
"""

import math
import unittest as ut

import numpy as np
from scipy.stats import kendalltau

from tweetrank.baselines import (
    interpolate,
    interpolated_run,
    lambda_grid,
    min_max_normalize,
    ql_rank,
    ql_score,
    tune_lambda,
)
from tweetrank.config.options import QlConfig
from tweetrank.corpus.stats import CollectionStats, build_stats
from tweetrank.errors import AlignmentError, StatsError
from tweetrank.features.tokenizer import prepare_document, prepare_query


class test_QueryLikelihood(ut.TestCase):
    stats = build_stats([prepare_document("1", "a b")], progress=False)
    config = QlConfig(mu=1.0)

    def test_score(self):
        self.assertAlmostEqual(ql_score(["a"], ["a"], self.stats, self.config), math.log(0.75), places=12)

    def test_repeated_query_term(self):
        single = ql_score(["a"], ["a", "b"], self.stats, self.config)
        double = ql_score(["a", "a"], ["a", "b"], self.stats, self.config)
        self.assertAlmostEqual(double, 2 * single, places=12)

    def test_unseen_term(self):
        score = ql_score(["zzz"], ["a"], self.stats, self.config)
        self.assertTrue(math.isfinite(score))
        self.assertAlmostEqual(score, math.log((1e-10 / 2) / 2), places=9)

    def test_default_smoothing(self):
        score = ql_score(["a"], ["a"], self.stats)
        self.assertAlmostEqual(score, math.log((1 + 2500 * 0.5) / (1 + 2500)), places=12)

    def test_rank(self):
        docs = [prepare_document("d1", "b b"), prepare_document("d2", "a b"), prepare_document("d3", "a")]
        ranking = ql_rank(prepare_query("q", "a"), docs, self.stats, self.config)
        self.assertListEqual([doc_id for doc_id, _ in ranking], ["d3", "d2", "d1"])

    def test_empty_statistics(self):
        with self.assertRaises(StatsError):
            ql_score(["a"], ["a"], CollectionStats())


class test_Interpolation(ut.TestCase):
    def test_min_max(self):
        normalized = min_max_normalize({"a": 2.0, "b": 4.0, "c": 3.0})
        self.assertDictEqual(normalized, {"a": 0.0, "b": 1.0, "c": 0.5})
        self.assertDictEqual(min_max_normalize({"a": 3.0, "b": 3.0}), {"a": 0.5, "b": 0.5})
        self.assertDictEqual(min_max_normalize({}), {})

    def test_combination(self):
        nn = {"q": {"d1": 0.8, "d2": 0.0, "d3": 1.0}}
        lm = {"q": {"d1": -6.0, "d2": -10.0, "d3": 0.0}}
        combined = interpolate(nn, lm, 0.25)
        self.assertAlmostEqual(combined["q"]["d1"], 0.25 * 0.8 + 0.75 * 0.4, places=12)
        self.assertAlmostEqual(combined["q"]["d1"], 0.5, places=12)
        self.assertAlmostEqual(combined["q"]["d3"], 1.0, places=12)

    def test_endpoints(self):
        rng = np.random.default_rng(0)
        docs = [f"d{ii}" for ii in range(20)]
        nn = {"q": dict(zip(docs, rng.uniform(size=20)))}
        lm = {"q": dict(zip(docs, rng.normal(size=20) - 30))}
        for lambda_, reference in [(1.0, nn), (0.0, lm)]:
            combined = interpolate(nn, lm, lambda_)["q"]
            tau, _ = kendalltau([combined[d] for d in docs], [reference["q"][d] for d in docs])
            self.assertAlmostEqual(tau, 1.0)

    def test_three_documents(self):
        nn = {"q": {"a": 1.0, "b": 0.0, "c": 0.5}}
        lm = {"q": {"a": 0.0, "b": 1.0, "c": 0.8}}
        run = interpolated_run(nn, lm, 0.5)
        self.assertListEqual([doc_id for doc_id, _ in run["q"]], ["c", "a", "b"])
        np.testing.assert_allclose([score for _, score in run["q"]], [0.65, 0.5, 0.5])

    def test_alignment(self):
        with self.assertRaises(AlignmentError):
            interpolate({"q": {"a": 1.0}}, {"q": {"b": 1.0}}, 0.5)
        with self.assertRaises(AlignmentError):
            interpolate({"q": {"a": 1.0}}, {"p": {"a": 1.0}}, 0.5)
        with self.assertRaises(ValueError):
            interpolate({"q": {"a": 1.0}}, {"q": {"a": 1.0}}, 1.5)

    def test_grid(self):
        grid = lambda_grid(0.05)
        self.assertEqual(len(grid), 21)
        self.assertEqual(grid[0], 0.0)
        self.assertEqual(grid[-1], 1.0)
        self.assertEqual(grid[10], 0.5)


class test_TuneLambda(ut.TestCase):
    qrels = {"q": {"r": 1, "n1": 0, "n2": 0}}

    def test_ties_pick_smallest(self):
        scores = {"q": {"r": 3.0, "n1": 2.0, "n2": 1.0}}
        best, table = tune_lambda(scores, scores, self.qrels)
        self.assertEqual(best, 0.0)
        self.assertEqual(len(table), 21)
        self.assertTrue(all(value == 1.0 for _, value in table))

    def test_network_wins(self):
        nn = {"q": {"r": 1.0, "n1": 0.999, "n2": 0.0}}
        lm = {"q": {"r": 0.0, "n1": 1.0, "n2": 0.5}}
        best, table = tune_lambda(nn, lm, self.qrels)
        self.assertEqual(best, 1.0)
        self.assertEqual(table[-1], (1.0, 1.0))
        self.assertAlmostEqual(table[0][1], 1 / 3)

    def test_language_model_wins(self):
        nn = {"q": {"r": 0.0, "n1": 1.0, "n2": 0.5}}
        lm = {"q": {"r": 1.0, "n1": 0.0, "n2": 0.2}}
        best, _ = tune_lambda(nn, lm, self.qrels)
        self.assertEqual(best, 0.0)


if __name__ == "__main__":
    ut.main()
