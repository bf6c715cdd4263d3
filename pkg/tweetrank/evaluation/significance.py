"""Fisher's two-sided paired randomization test."""

import numpy as np
from tqdm import tqdm

from tweetrank.errors import AlignmentError

MAX_EXACT_TOPICS = 20
_TOL = 1e-12
_CHUNK = 1 << 14


def _paired_differences(metric_a, metric_b) -> np.ndarray:
    a = np.asarray(metric_a, dtype=np.float64).reshape(-1)
    b = np.asarray(metric_b, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise AlignmentError(f"Per-topic vectors differ in length: {a.size} vs {b.size}")
    if a.size == 0:
        raise AlignmentError("The randomization test needs at least one topic")
    return a - b


def fisher_randomization(
    metric_a,
    metric_b,
    iterations: int = 10000,
    seed: int = 42,
    progress: bool = False,
) -> float:
    r"""
    Two-sided paired randomization test of `mean(A) - mean(B)`.

    Every iteration swaps the pair of each topic with probability 1/2. The
    p-value counts the identity permutation: `(count + 1) / (iterations + 1)`,
    where `count` is the number of iterations with `|delta_perm| >= |delta_obs|`.

    Parameters:
        metric_a: Per-topic metric of system A
        metric_b: Per-topic metric of system B, aligned by topic
        iterations: Number of random permutations
        seed: Seed of the sign generator
        progress: Show a progress bar

    Returns:
        p-value in (0, 1]
    """
    diffs = _paired_differences(metric_a, metric_b)
    if iterations < 1:
        raise ValueError(f"`iterations` must be >= 1, got {iterations}")
    observed = abs(diffs.mean())
    rng = np.random.default_rng(seed)
    count = 0
    num_chunks = (iterations + _CHUNK - 1) // _CHUNK
    for chunk in tqdm(range(num_chunks), desc="Randomization test", disable=not progress):
        size = min(_CHUNK, iterations - chunk * _CHUNK)
        signs = rng.integers(0, 2, size=(size, diffs.size)) * 2 - 1
        permuted = np.abs(signs @ diffs) / diffs.size
        count += int(np.count_nonzero(permuted >= observed - _TOL))
    return (count + 1) / (iterations + 1)


def fisher_randomization_exact(metric_a, metric_b) -> float:
    r"""
    Exact two-sided p-value by enumerating the `2^T` sign flips of the
    per-topic differences, for at most 20 topics.
    """
    diffs = _paired_differences(metric_a, metric_b)
    num_topics = diffs.size
    if num_topics > MAX_EXACT_TOPICS:
        raise ValueError(f"Exact enumeration supports at most {MAX_EXACT_TOPICS} topics, got {num_topics}")
    observed = abs(diffs.mean())
    total = 1 << num_topics
    bits = np.arange(num_topics, dtype=np.int64)
    count = 0
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        signs = ((idx[:, None] >> bits) & 1) * 2 - 1
        permuted = np.abs(signs @ diffs) / num_topics
        count += int(np.count_nonzero(permuted >= observed - _TOL))
    return count / total
