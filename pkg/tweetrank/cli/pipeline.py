"""
The pipeline stages behind the command line: statistics, training, reranking,
evaluation and ablations. Every stage reads its inputs from an `ExperimentConfig`
and writes its artifacts under `config.paths.output_dir`.
"""

from collections import OrderedDict
from dataclasses import dataclass, field, replace
from itertools import chain
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import yaml
from loguru import logger

from tweetrank.baselines.interpolation import tune_lambda
from tweetrank.config import ABLATION_FLAGS, ExperimentConfig, required_paths
from tweetrank.corpus.stats import CollectionStats, build_stats, load_stats, save_stats
from tweetrank.data.dataset import (
    PairEncoder,
    QueryGroup,
    build_groups,
    check_trainable,
    labels_as_qrels,
    resolve_max_lengths,
    split_queries,
)
from tweetrank.data.readers import (
    Qrels,
    RankedRun,
    rank_scores,
    read_corpus,
    read_qrels,
    read_run,
    read_topics,
    read_url_map,
    write_run,
)
from tweetrank.errors import UsageError
from tweetrank.evaluation.metrics import evaluate_run
from tweetrank.evaluation.report import compare_runs, per_topic_report, plot_per_topic_differences
from tweetrank.features.embeddings import load_pretrained_embeddings
from tweetrank.features.tokenizer import TokenizedDoc
from tweetrank.features.vocabulary import Vocabulary
from tweetrank.nn.architectures.mphcnn import MPHCNN, param_count
from tweetrank.trainer.predictor import Predictor
from tweetrank.trainer.trainer import Trainer, TrainingLog
from tweetrank.utils.fs import exists, get_basename, join, mkdir
from tweetrank.utils.read_file import file_opener
from tweetrank.utils.safe_run import SafeRun

TRAINING_LOG_FILE = "training_log.tsv"
LAMBDA_FILE = "lambda_tuning.tsv"
METRICS_FILE = "metrics.tsv"
SUMMARY_FILE = "metrics.yaml"
PER_TOPIC_FILE = "per_topic.tsv"
COMPARISON_FILE = "comparison.tsv"
ABLATION_FILE = "ablation.tsv"
DEPTH_SWEEP_FILE = "depth_sweep.tsv"
DEFAULT_RUN_NAME = "tweetrank"
DEFAULT_DEPTHS = (0, 1, 2, 3, 4)
FULL_MODEL = "full"

_FLOAT_FORMAT = "%.10f"


@dataclass
class PipelineData:
    corpus: "OrderedDict[str, TokenizedDoc]"
    train_topics: "OrderedDict[str, TokenizedDoc]" = field(default_factory=OrderedDict)
    test_topics: "OrderedDict[str, TokenizedDoc]" = field(default_factory=OrderedDict)
    qrels: Qrels = field(default_factory=dict)
    train_run: RankedRun = field(default_factory=dict)
    test_run: RankedRun = field(default_factory=dict)


@dataclass
class TrainingResult:
    predictor: Predictor
    log: TrainingLog
    lambda_table: List[Tuple[float, float]]
    train_groups: List[QueryGroup]
    val_groups: List[QueryGroup]


@dataclass
class RerankResult:
    run: RankedRun
    interp_run: Optional[RankedRun] = None
    ql_run: Optional[RankedRun] = None
    paths: Dict[str, str] = field(default_factory=dict)


def write_table(df: pd.DataFrame, path: str):
    """TSV without index, floats with a fixed precision so reruns give identical files."""
    with file_opener(path, "w") as f:
        df.to_csv(f, sep="\t", index=False, float_format=_FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"Wrote {path}")


def _url_map(config: ExperimentConfig) -> Dict[str, str]:
    if config.paths.url_map is None:
        return {}
    return read_url_map(required_paths(config, ["url_map"])["url_map"])


def load_data(config: ExperimentConfig, train: bool = True, test: bool = True) -> PipelineData:
    r"""
    Read the corpus with the inputs of the training and/or reranking stages.

    The training inputs (`train_topics`, `qrels`, `train_run`) are required when
    `train` is set; the test inputs (`test_topics`, `test_run`) are required
    when `test` is set and used when available otherwise.
    """
    names = ["corpus"] + (["train_topics", "qrels", "train_run"] if train else [])
    has_test = config.paths.test_topics is not None and config.paths.test_run is not None
    if test or has_test:
        names += ["test_topics", "test_run"]
    paths = required_paths(config, names)

    data = PipelineData(corpus=read_corpus(paths["corpus"], _url_map(config)))
    if train:
        data.train_topics = read_topics(paths["train_topics"])
        data.qrels = read_qrels(paths["qrels"])
        data.train_run = read_run(paths["train_run"])
    if "test_run" in paths:
        data.test_topics = read_topics(paths["test_topics"])
        data.test_run = read_run(paths["test_run"])
    return data


def run_build_stats(config: ExperimentConfig) -> CollectionStats:
    """Count the background corpus and save the statistics to `paths.stats`."""
    path = required_paths(config, ["background_corpus"])["background_corpus"]
    docs = read_corpus(path, _url_map(config))
    stats = build_stats(
        docs.values(),
        n_max_w=config.stats.n_max_w,
        n_max_c=config.stats.n_max_c,
        progress=config.training.progress,
    )
    mkdir(config.paths.output_dir)
    save_stats(stats, config.paths.stats)
    return stats


def load_or_build_stats(config: ExperimentConfig) -> CollectionStats:
    if exists(config.paths.stats):
        logger.info(f"Using the collection statistics of {config.paths.stats}")
        return load_stats(config.paths.stats)
    return run_build_stats(config)


def _write_training_log(log: TrainingLog, path: str):
    df = pd.DataFrame(
        {
            "epoch": [e.epoch for e in log.epochs],
            "train_loss": [e.train_loss for e in log.epochs],
            f"{log.monitored}_map": [e.val_map for e in log.epochs],
        }
    )
    write_table(df, path)


def run_training(
    config: ExperimentConfig,
    data: Optional[PipelineData] = None,
    stats: Optional[CollectionStats] = None,
) -> TrainingResult:
    r"""
    Train a ranking network on the training run and save it to `paths.checkpoint_dir`.

    Candidates of the training run are labeled with the judgments, unjudged
    ones being non-relevant. A seeded share of the training queries is held out
    to monitor early stopping and to tune the interpolation weight, which is
    stored with the checkpoint.
    """
    data = load_data(config, train=True, test=False) if data is None else data
    stats = load_or_build_stats(config) if stats is None else stats
    mkdir(config.paths.output_dir)

    docs = chain(data.corpus.values(), data.train_topics.values(), data.test_topics.values())
    vocab = Vocabulary.build(docs, embedding_dim=config.model.embedding_dim)

    groups = build_groups(data.train_topics, data.train_run, data.corpus, data.qrels)
    check_trainable(groups)
    test_groups = build_groups(data.test_topics, data.test_run, data.corpus) if data.test_run else []
    model_config = resolve_max_lengths(config.model, groups + test_groups)

    _, val_ids = split_queries(
        [g.query_id for g in groups], config.training.validation_fraction, config.seed
    )
    val_ids = set(val_ids)
    train_groups = [g for g in groups if g.query_id not in val_ids]
    val_groups = [g for g in groups if g.query_id in val_ids]
    logger.info(f"{len(train_groups)} training and {len(val_groups)} validation queries")

    word_embedding = None
    if config.paths.pretrained_embeddings is not None and model_config.uses_word:
        path = required_paths(config, ["pretrained_embeddings"])["pretrained_embeddings"]
        rng = np.random.default_rng(config.seed)
        word_embedding, num_found = load_pretrained_embeddings(path, vocab, rng)
        logger.info(f"{num_found} of {vocab.num_words - 2} words have a pretrained embedding")

    model = MPHCNN(model_config, vocab.num_words, vocab.num_trigrams, word_embedding=word_embedding)
    logger.info(f"{model} with {param_count(model_config)} parameters besides the embeddings")
    encoder = PairEncoder(vocab, stats, model_config)

    with SafeRun(name="TRAINING"):
        trainer = Trainer(model, config.training, seed=config.seed)
        log = trainer.fit(encoder.encode_groups(train_groups), encoder.encode_groups(val_groups))

    predictor = Predictor(model, vocab, stats, progress=config.training.progress)
    tune_groups = val_groups if val_groups else train_groups
    lambda_, lambda_table = tune_lambda(
        predictor.score_groups(tune_groups),
        predictor.ql_scores(tune_groups, config.ql),
        labels_as_qrels(tune_groups),
        step=config.training.lambda_step,
    )
    predictor.lambda_ = lambda_

    predictor.save(config.paths.checkpoint_dir)
    _write_training_log(log, join(config.paths.output_dir, TRAINING_LOG_FILE))
    lambda_df = pd.DataFrame(lambda_table, columns=["lambda", "map"])
    write_table(lambda_df, join(config.paths.output_dir, LAMBDA_FILE))
    return TrainingResult(
        predictor=predictor,
        log=log,
        lambda_table=lambda_table,
        train_groups=train_groups,
        val_groups=val_groups,
    )


def run_reranking(
    config: ExperimentConfig,
    predictor: Optional[Predictor] = None,
    data: Optional[PipelineData] = None,
    name: str = DEFAULT_RUN_NAME,
    write_ql: bool = False,
) -> RerankResult:
    r"""
    Rerank the candidates of the test run and write `<name>.run`.

    With an interpolation weight, fixed by `lambda_` or tuned at training,
    `<name>.interp.run` is written too; `write_ql` adds the query likelihood
    run `<name>.ql.run`.
    """
    data = load_data(config, train=False, test=True) if data is None else data
    if predictor is None:
        predictor = Predictor.load(config.paths.checkpoint_dir, progress=config.training.progress)
    mkdir(config.paths.output_dir)

    groups = build_groups(data.test_topics, data.test_run, data.corpus)
    with SafeRun(name="RERANKING"):
        nn_scores = predictor.score_groups(groups)
    result = RerankResult(run={query_id: rank_scores(scores) for query_id, scores in nn_scores.items()})
    result.paths["run"] = join(config.paths.output_dir, f"{name}.run")
    write_run(result.run, result.paths["run"], tag=name)

    lambda_ = config.fixed_lambda if config.fixed_lambda is not None else predictor.lambda_
    if lambda_ is None:
        logger.warning("No interpolation weight was given nor tuned, the interpolated run is skipped")
    else:
        logger.info(f"Interpolating with the query likelihood, lambda={lambda_:.2f}")
        result.interp_run = predictor.interpolate(groups, lambda_, config.ql, nn_scores=nn_scores)
        result.paths["interp_run"] = join(config.paths.output_dir, f"{name}.interp.run")
        write_run(result.interp_run, result.paths["interp_run"], tag=f"{name}.interp")

    if write_ql:
        ql_scores = predictor.ql_scores(groups, config.ql)
        result.ql_run = {query_id: rank_scores(scores) for query_id, scores in ql_scores.items()}
        result.paths["ql_run"] = join(config.paths.output_dir, f"{name}.ql.run")
        write_run(result.ql_run, result.paths["ql_run"], tag=f"{name}.ql")
    return result


def run_evaluation(
    config: ExperimentConfig,
    run_paths: Sequence[str],
    qrels_path: Optional[str] = None,
    plot: Optional[bool] = None,
) -> Dict[str, pd.DataFrame]:
    r"""
    Evaluate one run, or compare two runs.

    Writes `metrics.tsv` and `metrics.yaml`. With two runs, also writes the
    per-topic differences, the randomization test p-values and, when `plot`
    is set, one per-topic difference chart per metric.

    Returns:
        The written tables by name: `metrics`, and `per_topic`, `comparison` for two runs
    """
    if not (1 <= len(run_paths) <= 2):
        raise UsageError(f"Expected one or two runs, got {len(run_paths)}")
    qrels_path = config.paths.qrels if qrels_path is None else qrels_path
    if qrels_path is None:
        raise UsageError("The qrels are required, set `paths.qrels` or pass them explicitly")
    plot = config.eval.plot if plot is None else plot
    qrels = read_qrels(qrels_path)
    runs = [read_run(path) for path in run_paths]
    metrics = list(config.eval.metrics)
    mkdir(config.paths.output_dir)

    rows, summary = [], {"qrels": str(qrels_path), "runs": []}
    for label, path, run in zip(("run_a", "run_b"), run_paths, runs):
        evaluation = evaluate_run(run, qrels, metrics)
        entry = {"label": label, "path": str(path), "num_topics": len(evaluation.per_topic)}
        for metric in metrics:
            value = float(evaluation.means[metric])
            rows.append({"run": label, "path": str(path), "metric": metric, "value": value})
            entry[metric] = value
            logger.info(f"{label} {get_basename(path)}: {metric} = {value:.4f}")
        summary["runs"].append(entry)
    tables = {"metrics": pd.DataFrame(rows, columns=["run", "path", "metric", "value"])}
    write_table(tables["metrics"], join(config.paths.output_dir, METRICS_FILE))

    if len(runs) == 2:
        per_topic = []
        summary["comparison"] = {}
        comparison = compare_runs(
            runs[0], runs[1], qrels, metrics, iterations=config.eval.iterations, seed=config.seed
        )
        for metric, p_value in zip(comparison["metric"], comparison["p_value"]):
            report = per_topic_report(runs[0], runs[1], qrels, metric)
            per_topic.append(report.table.assign(metric=metric))
            summary["comparison"][metric] = {"p_value": float(p_value), **report.summary()}
            logger.info(f"{metric}: {report.summary()}, p = {p_value:.4f}")
            if plot:
                plot_per_topic_differences(
                    report, join(config.paths.output_dir, f"per_topic_{metric}.png"), title=metric
                )
        columns = ["metric", "topic", "metric_a", "metric_b", "delta"]
        tables["per_topic"] = pd.concat(per_topic, ignore_index=True)[columns]
        tables["comparison"] = comparison
        write_table(tables["per_topic"], join(config.paths.output_dir, PER_TOPIC_FILE))
        write_table(comparison, join(config.paths.output_dir, COMPARISON_FILE))

    with file_opener(join(config.paths.output_dir, SUMMARY_FILE), "w") as f:
        yaml.safe_dump(summary, f, sort_keys=False)
    return tables


def _condition_config(config: ExperimentConfig, name: str, model_config) -> ExperimentConfig:
    output_dir = join(config.paths.output_dir, name)
    paths = replace(config.paths, output_dir=output_dir, checkpoint_dir=join(output_dir, "model"))
    return replace(config, paths=paths, model=model_config)


def _train_and_rerank(
    config: ExperimentConfig, data: PipelineData, stats: CollectionStats, name: str
) -> Tuple[RankedRun, Predictor]:
    predictor = run_training(config, data=data, stats=stats).predictor
    return run_reranking(config, predictor=predictor, data=data, name=name).run, predictor


def run_ablation(
    config: ExperimentConfig,
    flags: Optional[Sequence[str]] = None,
    depths: Optional[Sequence[int]] = None,
) -> Dict[str, pd.DataFrame]:
    r"""
    Train the full model and one model per ablation flag, rerank the test run
    with each and report their metrics with p-values against the full model.
    With `depths`, also sweep the conv depth of the full model.

    Every condition writes its artifacts under `<output_dir>/<condition>`.

    Returns:
        `ablation` and, with `depths`, `depth_sweep` tables
    """
    flags = list(ABLATION_FLAGS) if flags is None else list(flags)
    base = replace(config.model, **{flag: False for flag in ABLATION_FLAGS})
    conditions = [(FULL_MODEL, base)] + [(flag, base.with_flag(flag)) for flag in flags]
    metrics = list(config.eval.metrics)

    data = load_data(config, train=True, test=True)
    qrels = data.qrels
    stats = load_or_build_stats(config)
    mkdir(config.paths.output_dir)

    runs, rows = {}, []
    for name, model_config in conditions:
        with SafeRun(name=f"ABLATION {name}"):
            condition = _condition_config(config, name, model_config)
            runs[name], _ = _train_and_rerank(condition, data, stats, name)
        row = {"condition": name}
        means = evaluate_run(runs[name], qrels, metrics).means
        comparison = compare_runs(
            runs[name], runs[FULL_MODEL], qrels, metrics, iterations=config.eval.iterations, seed=config.seed
        )
        for metric, p_value in zip(comparison["metric"], comparison["p_value"]):
            row[metric] = float(means[metric])
            row[f"p_{metric}"] = float(p_value)
        rows.append(row)
    tables = {"ablation": pd.DataFrame(rows)}
    write_table(tables["ablation"], join(config.paths.output_dir, ABLATION_FILE))

    if depths is not None:
        rows = []
        for depth in depths:
            name = f"depth_{depth}"
            model_config = replace(base, depth=int(depth))
            with SafeRun(name=f"DEPTH SWEEP N={depth}"):
                run, predictor = _train_and_rerank(
                    _condition_config(config, name, model_config), data, stats, name
                )
            means = evaluate_run(run, qrels, metrics).means
            row = {"depth": int(depth), "params": param_count(predictor.model.config)}
            row.update({metric: float(means[metric]) for metric in metrics})
            rows.append(row)
        tables["depth_sweep"] = pd.DataFrame(rows)
        write_table(tables["depth_sweep"], join(config.paths.output_dir, DEPTH_SWEEP_FILE))
    return tables
