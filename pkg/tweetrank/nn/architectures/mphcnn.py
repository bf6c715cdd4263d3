"""
Multi-perspective hierarchical convolutional network for ranking short posts.

A word component and a character component each embed their inputs and
stack `depth` shared convolutions. At every layer, including the raw
embeddings, the query is matched against the post (words and trigrams) and
against the post URL (trigrams). Each similarity matrix is normalized with a
document-side softmax, max and mean pooled per query row, and weighted by the
query phrase IDF. The concatenated features go through an MLP with a 2-way
softmax.
"""

from collections import OrderedDict
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from tweetrank.config.options import POOLS, ModelConfig
from tweetrank.errors import CheckpointError, ConfigError, DimensionError
from tweetrank.features.embeddings import init_embedding_table
from tweetrank.nn import functional as F
from tweetrank.nn.base_layers import MLP, ConvLayer, ConvStack
from tweetrank.nn.tensor import Tensor

NUM_CLASSES = 2


class ModelParams(OrderedDict):
    r"""Learnable tensors of a model, by name, in initialization order."""

    def arrays(self) -> Dict[str, np.ndarray]:
        """Copies of the parameter values."""
        return OrderedDict((name, np.array(t.data, copy=True)) for name, t in self.items())

    def assign(self, arrays: Dict[str, np.ndarray]):
        """Overwrite the parameter values in place. Names and shapes must match exactly."""
        missing = [name for name in self if name not in arrays]
        unexpected = [name for name in arrays if name not in self]
        if missing or unexpected:
            raise CheckpointError(f"Parameter names do not match: missing {missing}, unexpected {unexpected}")
        for name, tensor in self.items():
            value = np.asarray(arrays[name], dtype=np.float64)
            if value.shape != tensor.shape:
                raise DimensionError("assign", [name], value.shape, tensor.shape)
            tensor.data[...] = value

    def zero_grad(self):
        for tensor in self.values():
            tensor.grad = None

    def num_scalars(self, include_embeddings: bool = True) -> int:
        return sum(
            t.size for name, t in self.items() if include_embeddings or not name.endswith("_embedding")
        )


def feature_dim(config: ModelConfig) -> int:
    r"""
    Length of the match feature vector:
    `sum over active perspectives of (depth + 1) * num_pools * query_length`,
    where the query length is in words for the word perspective and in
    trigrams for the two character perspectives.
    """
    lengths = {
        "word": config.max_query_len,
        "doc_char": config.max_query_chars,
        "url_char": config.max_query_chars,
    }
    total = 0
    for perspective in config.perspectives():
        if lengths[perspective] is None:
            raise ConfigError(f"The query length of the `{perspective}` perspective is not resolved")
        total += (config.depth + 1) * len(config.pools()) * lengths[perspective]
    return total


def conv_param_count(config: ModelConfig) -> int:
    """Learnable scalars of the active conv stacks."""
    count = 0
    if config.uses_word:
        count += ConvStack.param_count(config.depth, config.embedding_dim, config.num_filters, config.k_word)
    if config.uses_char:
        count += ConvStack.param_count(config.depth, config.embedding_dim, config.num_filters, config.k_char)
    return count


def mlp_param_count(config: ModelConfig) -> int:
    return MLP.param_count(feature_dim(config), [config.mlp_hidden], NUM_CLASSES)


def param_count(config: ModelConfig) -> int:
    r"""
    Learnable scalars of the network, embeddings excluded (see `embedding_param_count`).
    It grows linearly with the depth once the input channels of the layers settle at `num_filters`.
    """
    return conv_param_count(config) + mlp_param_count(config)


def embedding_param_count(config: ModelConfig, num_words: int, num_trigrams: int) -> int:
    count = 0
    if config.uses_word:
        count += num_words * config.embedding_dim
    if config.uses_char:
        count += num_trigrams * config.embedding_dim
    return count


def wide_param_count(config: ModelConfig) -> int:
    r"""
    Conv parameters of the single-layer "wide" alternative, where the layer `h`
    context is captured by filters of width `h * k` applied directly on the
    embeddings. It grows quadratically with the depth.
    """
    count = 0
    for enabled, k in ((config.uses_word, config.k_word), (config.uses_char, config.k_char)):
        if enabled:
            count += sum(
                ConvLayer.param_count(config.embedding_dim, config.num_filters, h * k)
                for h in range(1, config.depth + 1)
            )
    return count


def hierarchical_representations(
    input_ids: np.ndarray,
    mask: np.ndarray,
    embedding: Tensor,
    conv_stack: ConvStack,
) -> List[Tensor]:
    r"""
    Parameters:
        input_ids: Token ids [..., len]
        mask: 1 on real tokens [..., len]
        embedding: Embedding table [V x L]
        conv_stack: Stack shared by queries and documents

    Returns:
        The `depth + 1` matrices [..., len x dim]: the embeddings, then each conv layer output.
        Padded rows are zero in all of them.
    """
    h = F.mask_rows(F.embedding(embedding, input_ids), mask)
    return conv_stack.forward(h, mask)


def similarity_features(
    mq: Tensor,
    md: Tensor,
    doc_mask: np.ndarray,
    query_weights: np.ndarray,
    pools: Sequence[str] = POOLS,
    no_idf: bool = False,
    query_mask: Optional[np.ndarray] = None,
    mean_pool_on_raw: bool = False,
) -> Tensor:
    r"""
    Match features of one layer.

    `S = Mq Md^T` is normalized with a softmax over the document columns, then
    each query row is pooled and multiplied by its query weight.

    Parameters:
        mq: Query matrix [..., n x d]
        md: Document matrix [..., m x d]
        doc_mask: 1 on the real document columns [..., m]
        query_weights: Weight of each query row [..., n]
        pools: Poolings to apply, in output order
        no_idf: Use `query_mask` (all ones when `None`) instead of `query_weights`
        query_mask: 1 on the real query rows [..., n]
        mean_pool_on_raw: Mean pooling reads `S` instead of the normalized matrix

    Returns:
        Features [..., len(pools) * n]
    """
    sim = F.matmul_nt(mq, md)
    sim_norm = F.softmax_rows_masked(sim, doc_mask)
    if no_idf:
        weights = np.ones(mq.shape[:-1]) if query_mask is None else np.asarray(query_mask, dtype=np.float64)
    else:
        weights = np.asarray(query_weights, dtype=np.float64)
    if weights.shape != mq.shape[:-1]:
        raise DimensionError("similarity_features", ["query rows"], weights.shape, mq.shape[:-1])

    features = []
    for pool in pools:
        source = sim if (pool == "mean" and mean_pool_on_raw) else sim_norm
        features.append(F.scale(F.pool_rows(source, doc_mask, pool), weights))
    return F.concat(features, axis=-1)


class MPHCNN:
    def __init__(
        self,
        config: ModelConfig,
        num_words: int,
        num_trigrams: int,
        word_embedding: Optional[np.ndarray] = None,
    ):
        r"""
        Parameters are created for the active components only, so that every
        parameter receives a gradient. Embeddings are uniform in [0, 0.1] with
        a zero padding row; conv filters and MLP weights are Glorot-uniform and
        biases start at zero. Everything is drawn from one generator seeded
        with `config.seed`.

        Parameters:
            config: Model hyper-parameters, with resolved maximum lengths
            num_words: Rows of the word embedding table
            num_trigrams: Rows of the trigram embedding table
            word_embedding: Optional initial word table, e.g. pretrained vectors
        """
        if not config.lengths_resolved():
            raise ConfigError("The maximum input lengths of the model config must be resolved")
        self.config = config
        self.num_words = num_words
        self.num_trigrams = num_trigrams
        rng = np.random.default_rng(config.seed)
        L, F_, N = config.embedding_dim, config.num_filters, config.depth

        self.word_embedding = self.word_stack = None
        self.trigram_embedding = self.char_stack = None
        if config.uses_word:
            if word_embedding is None:
                word_embedding = init_embedding_table(num_words, L, rng)
            elif word_embedding.shape != (num_words, L):
                raise DimensionError("MPHCNN", ["word embedding"], word_embedding.shape, (num_words, L))
            self.word_embedding = Tensor(word_embedding, requires_grad=True, name="word_embedding")
            self.word_stack = ConvStack(N, L, F_, config.k_word, name="word_conv", rng=rng)
        if config.uses_char:
            self.trigram_embedding = Tensor(
                init_embedding_table(num_trigrams, L, rng), requires_grad=True, name="trigram_embedding"
            )
            self.char_stack = ConvStack(N, L, F_, config.k_char, name="char_conv", rng=rng)

        self.feature_dim = feature_dim(config)
        self.mlp = MLP(
            self.feature_dim,
            [config.mlp_hidden],
            NUM_CLASSES,
            activation="relu",
            last_activation="none",
            dropout=config.dropout_rate,
            name="mlp",
            rng=rng,
        )

    @property
    def params(self) -> ModelParams:
        params = ModelParams()
        if self.word_embedding is not None:
            params[self.word_embedding.name] = self.word_embedding
            params.update(self.word_stack.parameters())
        if self.trigram_embedding is not None:
            params[self.trigram_embedding.name] = self.trigram_embedding
            params.update(self.char_stack.parameters())
        params.update(self.mlp.parameters())
        return params

    def _check_batch(self, batch):
        config = self.config
        expected = {
            "query_word_ids": config.max_query_len,
            "doc_word_ids": config.max_doc_len,
            "query_tri_ids": config.max_query_chars,
            "doc_tri_ids": config.max_doc_chars,
            "url_tri_ids": config.max_url_chars,
        }
        for name, length in expected.items():
            shape = getattr(batch, name).shape
            if shape[-1] != length:
                raise DimensionError("forward", [name], shape, (length,))
        weight_lengths = (("word_weights", config.max_query_len), ("char_weights", config.max_query_chars))
        for name, length in weight_lengths:
            shape = getattr(batch, name).shape
            if shape[-2:] != (config.depth + 1, length):
                raise DimensionError("forward", [name], shape, (config.depth + 1, length))

    def match_features(self, batch) -> Tensor:
        r"""
        Features [B x feature_dim], ordered by perspective (word, post chars, URL chars),
        then by layer 0..depth, each layer holding the max-pooled then the mean-pooled rows.
        """
        self._check_batch(batch)
        config = self.config
        pools = config.pools()
        options = dict(pools=pools, no_idf=config.no_idf, mean_pool_on_raw=config.mean_pool_on_raw)
        features = []

        if config.uses_word:
            q_reps = hierarchical_representations(
                batch.query_word_ids, batch.query_word_mask, self.word_embedding, self.word_stack
            )
            d_reps = hierarchical_representations(
                batch.doc_word_ids, batch.doc_word_mask, self.word_embedding, self.word_stack
            )
            for h in range(config.depth + 1):
                features.append(
                    similarity_features(
                        q_reps[h],
                        d_reps[h],
                        batch.doc_word_mask,
                        batch.word_weights[..., h, :],
                        query_mask=batch.query_word_mask,
                        **options,
                    )
                )

        if config.uses_char:
            q_reps = hierarchical_representations(
                batch.query_tri_ids, batch.query_tri_mask, self.trigram_embedding, self.char_stack
            )
            targets = []
            if not config.no_doc_char:
                targets.append((batch.doc_tri_ids, batch.doc_tri_mask))
            if not config.no_url_char:
                targets.append((batch.url_tri_ids, batch.url_tri_mask))
            for ids, mask in targets:
                d_reps = hierarchical_representations(ids, mask, self.trigram_embedding, self.char_stack)
                for h in range(config.depth + 1):
                    features.append(
                        similarity_features(
                            q_reps[h],
                            d_reps[h],
                            mask,
                            batch.char_weights[..., h, :],
                            query_mask=batch.query_tri_mask,
                            **options,
                        )
                    )

        return F.concat(features, axis=-1)

    def logits(self, batch, rng: Optional[np.random.Generator] = None) -> Tuple[Tensor, Tensor]:
        r"""
        Parameters:
            batch: A `PaddedBatch`
            rng: Dropout generator. Dropout is applied only when one is given.

        Returns:
            logits: [B x 2]
            features: [B x feature_dim]
        """
        features = self.match_features(batch)
        return self.mlp.forward(features, rng=rng), features

    def forward(
        self, batch, training: bool = False, rng: Optional[np.random.Generator] = None
    ) -> Tuple[np.ndarray, np.ndarray]:
        r"""
        Returns:
            probs: Probability of the relevant class [B]
            features: Match features [B x feature_dim]
        """
        logits, features = self.logits(batch, rng=rng if training else None)
        probs = F.softmax(logits).data[..., 1]
        return np.array(probs), np.array(features.data)

    def __repr__(self):
        return (
            f"{self.__class__.__name__}(depth={self.config.depth}, "
            f"perspectives={self.config.perspectives()}, "
            f"pools={self.config.pools()}, feature_dim={self.feature_dim})"
        )
