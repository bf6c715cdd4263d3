r"""Data classes grouping the options of every pipeline stage.

They double as OmegaConf structured schemas: a YAML file with one section per
class is merged onto them, then `OmegaConf.to_object` instantiates them and
the post-init checks run immediately.
"""

from dataclasses import dataclass, field, replace
from typing import List, Optional

from tweetrank.errors import ConfigError

ABLATION_FLAGS = (
    "no_mean_pool",
    "no_max_pool",
    "no_idf",
    "no_word_module",
    "no_url_char",
    "no_doc_char",
    "no_all_char",
)

PERSPECTIVES = ("word", "doc_char", "url_char")
POOLS = ("max", "mean")
MAX_SEED = 2**64 - 1


def _check_seed(seed: int):
    if not (0 <= int(seed) <= MAX_SEED):
        raise ConfigError(f"`seed` must be a 64-bit unsigned integer, got {seed}")


@dataclass
class PathsConfig:
    r"""
    Input and output locations. Any path supported by `fsspec` works.

    Parameters:
        corpus: TSV `doc_id<TAB>text<TAB>url` of every post
        url_map: TSV `short_url<TAB>resolved_url`
        train_topics: TSV `query_id<TAB>query_text` used for training
        test_topics: TSV of the topics to rerank
        qrels: TREC qrels `query_id 0 doc_id grade`
        train_run: TREC run of the training candidates
        test_run: TREC run of the candidates to rerank
        background_corpus: Corpus used for the statistics, defaults to `corpus`
        pretrained_embeddings: word2vec text file of word embeddings
        stats: Statistics file, defaults to `<output_dir>/stats.tsv`
        checkpoint_dir: Checkpoint directory, defaults to `<output_dir>/model`
        output_dir: Directory of every artifact, created if absent
    """

    corpus: Optional[str] = None
    url_map: Optional[str] = None
    train_topics: Optional[str] = None
    test_topics: Optional[str] = None
    qrels: Optional[str] = None
    train_run: Optional[str] = None
    test_run: Optional[str] = None
    background_corpus: Optional[str] = None
    pretrained_embeddings: Optional[str] = None
    stats: Optional[str] = None
    checkpoint_dir: Optional[str] = None
    output_dir: str = "outputs"


@dataclass
class ModelConfig:
    r"""
    Hyper-parameters and ablation switches of the ranking network.

    Parameters:
        depth: Number N of stacked conv layers per component
        k_word: Filter width of the word component
        k_char: Filter width of the character component
        num_filters: Number F of filters per conv layer
        embedding_dim: Dimension L of word and trigram embeddings
        mlp_hidden: Width of the hidden layer of the final MLP
        dropout_rate: Dropout on the concatenated match features, in [0, 1). Tuned in [0.1, 0.5];
            0 turns dropout off.
        no_mean_pool: Drop the mean-pooled features
        no_max_pool: Drop the max-pooled features
        no_idf: Replace the query term weights by ones
        no_word_module: Drop the word component
        no_url_char: Drop the query-vs-URL character features
        no_doc_char: Drop the query-vs-post character features
        no_all_char: Drop the character component, implies the two above
        mean_pool_on_raw: Mean-pool the raw similarities instead of the softmax-normalized ones
        max_query_len: Padded query length in words, derived from the data when `None`
        max_doc_len: Padded post length in words
        max_query_chars: Padded query length in trigrams
        max_doc_chars: Padded post length in trigrams
        max_url_chars: Padded URL length in trigrams
        seed: Seed of the parameter initialization
    """

    depth: int = 4
    k_word: int = 2
    k_char: int = 4
    num_filters: int = 64
    embedding_dim: int = 50
    mlp_hidden: int = 150
    dropout_rate: float = 0.1
    no_mean_pool: bool = False
    no_max_pool: bool = False
    no_idf: bool = False
    no_word_module: bool = False
    no_url_char: bool = False
    no_doc_char: bool = False
    no_all_char: bool = False
    mean_pool_on_raw: bool = False
    max_query_len: Optional[int] = None
    max_doc_len: Optional[int] = None
    max_query_chars: Optional[int] = None
    max_doc_chars: Optional[int] = None
    max_url_chars: Optional[int] = None
    seed: int = 42

    def __post_init__(self):
        if self.depth < 0:
            raise ConfigError(f"`depth` must be >= 0, got {self.depth}")
        for name in ("k_word", "k_char", "num_filters", "embedding_dim", "mlp_hidden"):
            if getattr(self, name) < 1:
                raise ConfigError(f"`{name}` must be >= 1, got {getattr(self, name)}")
        if not (0.0 <= self.dropout_rate < 1.0):
            raise ConfigError(f"`dropout_rate` must be in [0, 1), got {self.dropout_rate}")
        for name in self.max_length_names():
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ConfigError(f"`{name}` must be >= 1, got {value}")
        _check_seed(self.seed)

        # Dropping both character perspectives is the same ablation as dropping the component
        if self.no_url_char and self.no_doc_char:
            self.no_all_char = True
        if self.no_all_char:
            self.no_url_char = True
            self.no_doc_char = True

        if self.no_word_module and self.no_all_char:
            raise ConfigError("`no_word_module` with `no_all_char` leaves no match features")
        if self.no_max_pool and self.no_mean_pool:
            raise ConfigError("`no_max_pool` with `no_mean_pool` leaves no match features")
        active = self.ablation()
        if len(active) > 1:
            raise ConfigError(
                f"At most one ablation flag can be set, got {active}. Valid flags: {ABLATION_FLAGS}"
            )

    @staticmethod
    def max_length_names() -> List[str]:
        return ["max_query_len", "max_doc_len", "max_query_chars", "max_doc_chars", "max_url_chars"]

    def ablation(self) -> List[str]:
        r"""The active ablation, as a list of at most one flag name."""
        primary = ("no_mean_pool", "no_max_pool", "no_idf", "no_word_module")
        active = [name for name in primary if getattr(self, name)]
        if self.no_all_char:
            active.append("no_all_char")
        elif self.no_url_char:
            active.append("no_url_char")
        elif self.no_doc_char:
            active.append("no_doc_char")
        return active

    def with_flag(self, flag: Optional[str]) -> "ModelConfig":
        """Copy of this config with the ablation `flag` switched on. `None` is the full model."""
        if flag is None:
            return replace(self)
        if flag not in ABLATION_FLAGS:
            raise ConfigError(f"Unknown ablation flag `{flag}`. Valid flags: {', '.join(ABLATION_FLAGS)}")
        return replace(self, **{flag: True})

    def perspectives(self) -> List[str]:
        r"""Active perspectives, in feature order."""
        active = []
        if not self.no_word_module:
            active.append("word")
        if not self.no_doc_char:
            active.append("doc_char")
        if not self.no_url_char:
            active.append("url_char")
        return active

    def pools(self) -> List[str]:
        r"""Active poolings, in feature order."""
        return [pool for pool in POOLS if not getattr(self, f"no_{pool}_pool")]

    @property
    def uses_word(self) -> bool:
        return not self.no_word_module

    @property
    def uses_char(self) -> bool:
        return not self.no_all_char

    def lengths_resolved(self) -> bool:
        return all(getattr(self, name) is not None for name in self.max_length_names())


@dataclass
class TrainingConfig:
    r"""
    Parameters:
        learning_rate: SGD step size. `0` keeps the parameters frozen.
        batch_size: Number of query-post pairs per SGD step
        max_epochs: Maximum number of passes over the training pairs
        min_epochs: Passes always run before early stopping may end the training
        patience: Epochs without validation MAP improvement before stopping
        validation_fraction: Fraction of the training queries held out for validation
        loss_reduction: `"mean"` divides the batch loss by the batch size, `"sum"` does not
        lambda_step: Grid step of the interpolation weight search
        progress: Show progress bars
    """

    learning_rate: float = 0.05
    batch_size: int = 64
    max_epochs: int = 30
    min_epochs: int = 5
    patience: int = 3
    validation_fraction: float = 0.15
    loss_reduction: str = "mean"
    lambda_step: float = 0.05
    progress: bool = True

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ConfigError(f"`learning_rate` must be >= 0, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ConfigError(f"`batch_size` must be >= 1, got {self.batch_size}")
        if self.max_epochs < 1:
            raise ConfigError(f"`max_epochs` must be >= 1, got {self.max_epochs}")
        if self.min_epochs < 1:
            raise ConfigError(f"`min_epochs` must be >= 1, got {self.min_epochs}")
        if self.patience < 1:
            raise ConfigError(f"`patience` must be >= 1, got {self.patience}")
        if not (0.0 <= self.validation_fraction < 1.0):
            raise ConfigError(f"`validation_fraction` must be in [0, 1), got {self.validation_fraction}")
        if self.loss_reduction not in ("mean", "sum"):
            raise ConfigError(f"`loss_reduction` must be 'mean' or 'sum', got {self.loss_reduction}")
        if not (0.0 < self.lambda_step <= 1.0):
            raise ConfigError(f"`lambda_step` must be in (0, 1], got {self.lambda_step}")


@dataclass
class StatsConfig:
    r"""
    Parameters:
        n_max_w: Longest word n-gram with an exact document frequency
        n_max_c: Longest run of character trigrams with an exact document frequency
    """

    n_max_w: int = 3
    n_max_c: int = 5

    def __post_init__(self):
        if self.n_max_w < 1 or self.n_max_c < 1:
            raise ConfigError(f"`n_max_w` and `n_max_c` must be >= 1, got {self.n_max_w} and {self.n_max_c}")


@dataclass
class QlConfig:
    r"""
    Parameters:
        mu: Dirichlet smoothing parameter
        epsilon: Floor of the collection probability of unseen terms, relative to `total_terms`
    """

    mu: float = 2500.0
    epsilon: float = 1e-10

    def __post_init__(self):
        if not self.mu > 0:
            raise ConfigError(f"`mu` must be > 0, got {self.mu}")
        if not self.epsilon > 0:
            raise ConfigError(f"`epsilon` must be > 0, got {self.epsilon}")


@dataclass
class EvalConfig:
    r"""
    Parameters:
        metrics: Metrics to report, among `map` and `P_<k>`
        iterations: Permutations of the randomization test
        plot: Save the per-topic difference chart when two runs are compared
    """

    metrics: List[str] = field(default_factory=lambda: ["map", "P_30"])
    iterations: int = 10000
    plot: bool = False

    def __post_init__(self):
        if len(self.metrics) == 0:
            raise ConfigError("At least one metric is required")
        for metric in self.metrics:
            is_precision = metric.startswith("P_") and metric[2:].isdigit() and int(metric[2:]) > 0
            if metric != "map" and not is_precision:
                raise ConfigError(f"Unknown metric `{metric}`, expected `map` or `P_<k>`")
        if self.iterations < 1:
            raise ConfigError(f"`iterations` must be >= 1, got {self.iterations}")


@dataclass
class ExperimentConfig:
    r"""
    Every option of the pipeline.

    Parameters:
        paths: Inputs and outputs
        model: Network hyper-parameters
        training: Optimization options
        stats: Collection statistics options
        ql: Query likelihood options
        eval: Evaluation options
        lambda_: Interpolation weight in [0, 1], or `"tune"` to use the weight tuned at training
        seed: Seed of every randomized step, copied into `model.seed`
    """

    paths: PathsConfig = field(default_factory=PathsConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    training: TrainingConfig = field(default_factory=TrainingConfig)
    stats: StatsConfig = field(default_factory=StatsConfig)
    ql: QlConfig = field(default_factory=QlConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    lambda_: str = "tune"
    seed: int = 42

    def __post_init__(self):
        _check_seed(self.seed)
        self.model.seed = int(self.seed)
        self.lambda_ = str(self.lambda_).strip().lower()
        if self.lambda_ != "tune":
            try:
                value = float(self.lambda_)
            except ValueError:
                raise ConfigError(f"`lambda_` must be a number in [0, 1] or 'tune', got {self.lambda_}")
            if not (0.0 <= value <= 1.0):
                raise ConfigError(f"`lambda_` must be in [0, 1], got {value}")

    @property
    def fixed_lambda(self) -> Optional[float]:
        """The interpolation weight, or `None` when it must be tuned."""
        return None if self.lambda_ == "tune" else float(self.lambda_)
