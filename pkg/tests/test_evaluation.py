"""
Unit tests for the metrics, significance test and reports of tweetrank/evaluation/...
"""

import math
import os
import tempfile
import unittest as ut

import numpy as np

from tweetrank.data.readers import read_qrels, read_run
from tweetrank.errors import AlignmentError
from tweetrank.evaluation.metrics import (
    average_precision,
    evaluate_run,
    judged_topics,
    mean_average_precision,
    metric_value,
    per_topic_values,
    precision_at_k,
)
from tweetrank.evaluation.report import compare_runs, per_topic_report, plot_per_topic_differences
from tweetrank.evaluation.significance import fisher_randomization, fisher_randomization_exact


def _ap_oracle(relevant_flags, total_relevant):
    flags = np.asarray(relevant_flags, dtype=float)
    precision = np.cumsum(flags) / np.arange(1, flags.size + 1)
    return float((precision * flags).sum() / total_relevant)


class test_Metrics(ut.TestCase):
    def test_average_precision(self):
        judgments = {"r1": 1, "r2": 2, "n": 0}
        self.assertAlmostEqual(average_precision(["r1", "n", "r2"], judgments), (1 + 2 / 3) / 2)
        self.assertAlmostEqual(average_precision(["r1", "n", "r2"], judgments), 0.8333, places=4)
        self.assertEqual(average_precision(["r2", "r1", "n"], judgments), 1.0)
        self.assertEqual(average_precision(["n", "x"], judgments), 0.0)
        self.assertIsNone(average_precision(["n"], {"n": 0}))

    def test_scored_rows(self):
        ranked = [("r1", 3.0), ("n", 2.0), ("r2", 1.0)]
        self.assertAlmostEqual(average_precision(ranked, {"r1": 1, "r2": 1}), (1 + 2 / 3) / 2)

    def test_precision_at_k(self):
        ranked = [f"d{ii}" for ii in range(40)]
        judgments = {f"d{ii}": 1 for ii in range(0, 30, 3)}
        self.assertAlmostEqual(precision_at_k(ranked, judgments, 30), 1 / 3)
        judgments = {f"d{ii}": 1 for ii in range(15)}
        self.assertAlmostEqual(precision_at_k(ranked, judgments, 30), 0.5)
        # Fewer ranked documents than k still divide by k
        self.assertAlmostEqual(precision_at_k(["d0", "d1", "d2"], judgments, 30), 0.1)
        self.assertAlmostEqual(metric_value("P_5", ranked, judgments), 1.0)
        with self.assertRaises(ValueError):
            metric_value("ndcg", ranked, judgments)

    def test_random_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            num_docs = int(rng.integers(1, 30))
            ranked = [f"d{ii}" for ii in rng.permutation(num_docs)]
            grades = rng.integers(0, 3, size=num_docs + 5)
            judgments = {f"d{ii}": int(g) for ii, g in enumerate(grades)}
            total = sum(1 for g in grades if g >= 1)
            value = average_precision(ranked, judgments)
            if total == 0:
                self.assertIsNone(value)
                continue
            flags = [judgments[d] >= 1 for d in ranked]
            self.assertAlmostEqual(value, _ap_oracle(flags, total), places=12)
            self.assertGreaterEqual(value, 0.0)
            self.assertLessEqual(value, 1.0)

    def test_topics(self):
        run = {"q1": [("a", 1.0)], "q2": [("b", 1.0)], "q3": [("c", 1.0)]}
        qrels = {"q1": {"a": 1}, "q2": {"b": 0}, "q4": {"d": 1}}
        self.assertListEqual(judged_topics(run, qrels), ["q1"])
        np.testing.assert_array_equal(per_topic_values(run, qrels, "map", ["q1", "q4"]), [1.0, 0.0])
        self.assertEqual(mean_average_precision(run, qrels), 1.0)
        self.assertEqual(mean_average_precision({}, qrels), 0.0)


def test_evaluate_tiny_run(datadir):
    run = read_run(str(datadir / "tiny" / "run.txt"))
    qrels = read_qrels(str(datadir / "tiny" / "qrels.txt"))
    evaluation = evaluate_run(run, qrels, ["map", "P_30", "P_2"])
    assert list(evaluation.per_topic.index) == ["MB01", "MB02"]
    np.testing.assert_allclose(evaluation.per_topic["map"], [0.5, 0.5])
    assert math.isclose(evaluation.means["map"], 0.5)
    assert math.isclose(evaluation.means["P_30"], 2 / 30)
    assert math.isclose(evaluation.means["P_2"], 0.5)


class test_Randomization(ut.TestCase):
    def test_identical_runs(self):
        values = np.random.default_rng(1).uniform(size=15)
        self.assertEqual(fisher_randomization(values, values, iterations=500), 1.0)
        self.assertEqual(fisher_randomization_exact(values, values), 1.0)

    def test_single_topic(self):
        self.assertEqual(fisher_randomization([0.5], [0.2], iterations=200), 1.0)
        self.assertEqual(fisher_randomization_exact([0.5], [0.2]), 1.0)

    def test_uniform_shift(self):
        b = np.random.default_rng(2).uniform(0.0, 0.8, size=10)
        a = b + 0.1
        self.assertAlmostEqual(fisher_randomization_exact(a, b), 2 / 1024, places=12)
        p_value = fisher_randomization(a, b, iterations=50000, seed=3)
        self.assertLess(abs(p_value - 2 / 1024), 0.001)

    def test_sampled_matches_exact(self):
        rng = np.random.default_rng(4)
        a, b = rng.uniform(size=12), rng.uniform(size=12)
        iterations = 20000
        exact = fisher_randomization_exact(a, b)
        sampled = fisher_randomization(a, b, iterations=iterations, seed=9)
        std_err = math.sqrt(exact * (1 - exact) / iterations)
        self.assertLessEqual(abs(sampled - exact), 3 * std_err + 1 / iterations)

    def test_seeded(self):
        rng = np.random.default_rng(6)
        a, b = rng.uniform(size=30), rng.uniform(size=30)
        first = fisher_randomization(a, b, iterations=1000, seed=1)
        self.assertEqual(first, fisher_randomization(a, b, iterations=1000, seed=1))

    def test_errors(self):
        with self.assertRaises(AlignmentError):
            fisher_randomization([0.1, 0.2], [0.1])
        with self.assertRaises(AlignmentError):
            fisher_randomization([], [])
        with self.assertRaises(ValueError):
            fisher_randomization_exact(np.zeros(21), np.ones(21))


class test_Report(ut.TestCase):
    qrels = {"q1": {"r": 1, "n": 0}, "q2": {"r": 1, "n": 0}, "q3": {"r": 2, "n": 0}, "q4": {"n": 0}}
    run_a = {"q1": [("r", 2.0), ("n", 1.0)], "q2": [("n", 2.0), ("r", 1.0)], "q3": [("r", 2.0), ("n", 1.0)]}
    run_b = {"q1": [("n", 2.0), ("r", 1.0)], "q2": [("r", 2.0), ("n", 1.0)], "q3": [("r", 2.0), ("n", 1.0)]}

    def test_per_topic(self):
        report = per_topic_report(self.run_a, self.run_b, self.qrels, "map")
        self.assertListEqual(list(report.table["topic"]), ["q1", "q3", "q2"])
        np.testing.assert_allclose(report.table["delta"], [0.5, 0.0, -0.5])
        self.assertDictEqual(report.summary(), {"wins": 1, "losses": 1, "ties": 1})

    def test_missing_topic(self):
        run_b = {q: ranking for q, ranking in self.run_b.items() if q != "q3"}
        report = per_topic_report(self.run_a, run_b, self.qrels, "map")
        row = report.table.set_index("topic").loc["q3"]
        self.assertEqual(row["metric_b"], 0.0)
        self.assertEqual(report.wins, 2)

    def test_identical_runs(self):
        report = per_topic_report(self.run_a, self.run_a, self.qrels)
        self.assertDictEqual(report.summary(), {"wins": 0, "losses": 0, "ties": 3})
        table = compare_runs(self.run_a, self.run_a, self.qrels, ["map", "P_1"], iterations=100)
        self.assertListEqual(list(table.columns), ["metric", "mean_a", "mean_b", "delta", "p_value"])
        np.testing.assert_allclose(table["p_value"], [1.0, 1.0])
        np.testing.assert_allclose(table["delta"], [0.0, 0.0])

    def test_compare(self):
        table = compare_runs(self.run_a, self.run_b, self.qrels, ["map"], iterations=100).set_index("metric")
        self.assertAlmostEqual(table.loc["map", "mean_a"], 2.5 / 3)
        self.assertAlmostEqual(table.loc["map", "mean_b"], 2.5 / 3)
        self.assertEqual(table.loc["map", "p_value"], 1.0)

    def test_plot(self):
        report = per_topic_report(self.run_a, self.run_b, self.qrels)
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, "per_topic_map.png")
            plot_per_topic_differences(report, path, title="A vs B")
            self.assertTrue(os.path.isfile(path))
            self.assertGreater(os.path.getsize(path), 0)


if __name__ == "__main__":
    ut.main()
