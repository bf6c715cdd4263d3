from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
from matplotlib import pyplot as plt
import numpy as np
import pandas as pd
from matplotlib.offsetbox import AnchoredText

from tweetrank.data.readers import Qrels, RankedRun
from tweetrank.evaluation.metrics import DEFAULT_METRICS, num_relevant, per_topic_values
from tweetrank.evaluation.significance import fisher_randomization
from tweetrank.utils.read_file import file_opener

_TIE_TOL = 1e-12


@dataclass
class PerTopicReport:
    r"""
    Parameters:
        metric: Name of the compared metric
        table: Columns `topic`, `metric_a`, `metric_b`, `delta`, sorted by descending delta
        wins: Topics where A beats B
        losses: Topics where B beats A
        ties: Topics where both are equal
    """

    metric: str
    table: pd.DataFrame
    wins: int
    losses: int
    ties: int

    def summary(self) -> Dict[str, int]:
        return {"wins": self.wins, "losses": self.losses, "ties": self.ties}


def shared_topics(run_a: RankedRun, run_b: RankedRun, qrels: Qrels) -> List[str]:
    """Topics of either run with at least one relevant document, sorted."""
    return sorted(q for q in set(run_a) | set(run_b) if num_relevant(qrels.get(q)) > 0)


def per_topic_report(run_a: RankedRun, run_b: RankedRun, qrels: Qrels, metric: str = "map") -> PerTopicReport:
    r"""
    Per-topic comparison of two runs on `metric`. A topic missing from one of
    the runs scores 0 for it. Rows are sorted by descending delta, then topic.
    """
    topics = shared_topics(run_a, run_b, qrels)
    values_a = per_topic_values(run_a, qrels, metric, topics)
    values_b = per_topic_values(run_b, qrels, metric, topics)
    table = pd.DataFrame({"topic": topics, "metric_a": values_a, "metric_b": values_b})
    table["delta"] = table["metric_a"] - table["metric_b"]
    table = table.sort_values(["delta", "topic"], ascending=[False, True], kind="mergesort")
    table = table.reset_index(drop=True)
    delta = table["delta"].to_numpy()
    return PerTopicReport(
        metric=metric,
        table=table,
        wins=int(np.sum(delta > _TIE_TOL)),
        losses=int(np.sum(delta < -_TIE_TOL)),
        ties=int(np.sum(np.abs(delta) <= _TIE_TOL)),
    )


def compare_runs(
    run_a: RankedRun,
    run_b: RankedRun,
    qrels: Qrels,
    metrics: Sequence[str] = DEFAULT_METRICS,
    iterations: int = 10000,
    seed: int = 42,
) -> pd.DataFrame:
    r"""
    Means of both runs and the randomization-test p-value of each metric.

    Returns:
        Columns `metric`, `mean_a`, `mean_b`, `delta`, `p_value`, one row per metric
    """
    topics = shared_topics(run_a, run_b, qrels)
    rows = []
    for metric in metrics:
        values_a = per_topic_values(run_a, qrels, metric, topics)
        values_b = per_topic_values(run_b, qrels, metric, topics)
        p_value = 1.0
        if topics:
            p_value = fisher_randomization(values_a, values_b, iterations=iterations, seed=seed)
        mean_a = float(values_a.mean()) if topics else 0.0
        mean_b = float(values_b.mean()) if topics else 0.0
        rows.append(
            {
                "metric": metric,
                "mean_a": mean_a,
                "mean_b": mean_b,
                "delta": mean_a - mean_b,
                "p_value": p_value,
            }
        )
    return pd.DataFrame(rows, columns=["metric", "mean_a", "mean_b", "delta", "p_value"])


def plot_per_topic_differences(
    report: PerTopicReport, path: str, title: Optional[str] = None, dpi: int = 150
):
    """Bar chart of the per-topic deltas of `report`, in the table order, saved to `path`."""
    table = report.table
    fig, ax = plt.subplots(figsize=(max(4.0, 0.25 * len(table) + 2), 3.5))
    colors = [
        "tab:blue" if d > _TIE_TOL else ("tab:red" if d < -_TIE_TOL else "tab:gray") for d in table["delta"]
    ]
    ax.bar(np.arange(len(table)), table["delta"], color=colors)
    ax.axhline(0.0, color="black", linewidth=0.8)
    ax.set_xlabel("Topics")
    ax.set_ylabel(f"{report.metric} difference")
    ax.set_xticks([])
    if title is not None:
        ax.set_title(title)
    text = f"wins = {report.wins}\nlosses = {report.losses}\nties = {report.ties}"
    anchored_text = AnchoredText(text, loc="upper right")
    anchored_text.patch._alpha = 0.25
    ax.add_artist(anchored_text)
    with file_opener(path, "wb") as f:
        fig.savefig(f, format=str(path).rsplit(".", 1)[-1], dpi=dpi, bbox_inches="tight")
    plt.close(fig)
