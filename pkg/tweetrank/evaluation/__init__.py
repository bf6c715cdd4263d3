from .metrics import (
    average_precision,
    precision_at_k,
    mean_average_precision,
    per_topic_values,
    judged_topics,
    evaluate_run,
    RunEvaluation,
)
from .significance import fisher_randomization, fisher_randomization_exact
from .report import PerTopicReport, per_topic_report, compare_runs, plot_per_topic_differences
