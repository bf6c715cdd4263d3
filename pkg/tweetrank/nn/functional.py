"""
Differentiable operations used by the ranking network.

All operations accept an arbitrary number of leading batch dimensions, take
`Tensor` inputs for learnable/differentiable values and plain numpy arrays for
constants (ids, masks, weights). They record themselves on the active tape
when an input requires a gradient.
"""

from typing import List, Optional, Sequence

import numpy as np

from tweetrank.errors import DegenerateDocumentError, DimensionError
from tweetrank.nn.tensor import Tensor, needs_recording

PAD_ID = 0


def _result(data: np.ndarray, op: str, inputs: Sequence[Tensor], backward) -> Tensor:
    tape = needs_recording(*inputs)
    out = Tensor(data, requires_grad=tape is not None).check_finite(f"after `{op}`")
    if tape is not None:
        tape.record(op, out, inputs, backward)
    return out


def _check_mask(op: str, mask: np.ndarray, expected_shape: Sequence[int]) -> np.ndarray:
    mask = np.asarray(mask, dtype=np.float64)
    if mask.shape[-1] != expected_shape[-1]:
        raise DimensionError(op, ["columns"], mask.shape, expected_shape)
    if np.any(mask.sum(axis=-1) == 0):
        raise DegenerateDocumentError(f"`{op}`: the document mask has no unmasked column")
    return mask


def embedding(table: Tensor, ids: np.ndarray, pad_id: int = PAD_ID) -> Tensor:
    r"""
    Look up rows of `table` [V x L] for the integer `ids` of any shape.
    The row of `pad_id` receives no gradient, so it stays frozen.
    """
    ids = np.asarray(ids, dtype=np.int64)
    if table.ndim != 2:
        raise DimensionError("embedding", ["table rank"], table.shape, (0, 0))
    if ids.size > 0 and (ids.min() < 0 or ids.max() >= table.shape[0]):
        raise DimensionError("embedding", ["vocabulary"], (int(ids.max()) + 1,), table.shape)

    def backward(grad):
        keep = ids != pad_id
        grad_table = np.zeros_like(table.data)
        np.add.at(grad_table, ids[keep], grad[keep])
        return (grad_table,)

    return _result(table.data[ids], "embedding", (table,), backward)


def mask_rows(x: Tensor, mask: np.ndarray) -> Tensor:
    r"""Zero the rows of `x` [..., n, d] where `mask` [..., n] is 0."""
    mask = np.asarray(mask, dtype=np.float64)
    if mask.shape != x.shape[:-1]:
        raise DimensionError("mask_rows", ["rows"], mask.shape, x.shape[:-1])
    m = mask[..., None]
    return _result(x.data * m, "mask_rows", (x,), lambda grad: (grad * m,))


def conv1d_same(x: Tensor, filters: Tensor, bias: Tensor) -> Tensor:
    r"""
    Same-length 1D convolution over the sequence axis.

    Parameters:
        x: Input [..., n, C_in]
        filters: Filters [F, k, C_in]
        bias: Bias [F]

    Returns:
        Output [..., n, F]. Row i depends on input rows
        [i - floor((k-1)/2), i + ceil((k-1)/2)]; out-of-range rows are zeros,
        so an even `k` puts the extra zero pad on the right.
    """
    if x.ndim < 2:
        raise DimensionError("conv1d_same", ["input rank"], x.shape, (0, 0))
    if filters.ndim != 3:
        raise DimensionError("conv1d_same", ["filter rank"], filters.shape, (0, 0, 0))
    num_filters, k, c_in = filters.shape
    n = x.shape[-2]
    if c_in != x.shape[-1]:
        raise DimensionError("conv1d_same", ["input channels", "filter channels"], x.shape, filters.shape)
    if bias.shape != (num_filters,):
        raise DimensionError("conv1d_same", ["filters", "bias"], filters.shape, bias.shape)
    if k < 1 or n < 1:
        raise DimensionError("conv1d_same", ["window", "length"], (k,), (n,))

    left = (k - 1) // 2
    right = k - 1 - left
    lead = x.shape[:-2]
    pad = [(0, 0)] * len(lead) + [(left, right), (0, 0)]
    x_pad = np.pad(x.data, pad)

    # [..., n, k, C_in] -> [..., n, k * C_in]
    windows = np.stack([x_pad[..., j : j + n, :] for j in range(k)], axis=-2)
    windows = windows.reshape(*lead, n, k * c_in)
    w_flat = filters.data.reshape(num_filters, k * c_in)
    out = windows @ w_flat.T + bias.data

    def backward(grad):
        grad_flat = grad.reshape(-1, num_filters)
        grad_filters = (grad_flat.T @ windows.reshape(-1, k * c_in)).reshape(filters.shape)
        grad_bias = grad_flat.sum(axis=0)
        grad_windows = (grad @ w_flat).reshape(*lead, n, k, c_in)
        grad_pad = np.zeros_like(x_pad)
        for j in range(k):
            grad_pad[..., j : j + n, :] += grad_windows[..., j, :]
        grad_x = grad_pad[..., left : left + n, :]
        return grad_x, grad_filters, grad_bias

    return _result(out, "conv1d_same", (x, filters, bias), backward)


def relu(x: Tensor) -> Tensor:
    active = x.data > 0
    return _result(np.where(active, x.data, 0.0), "relu", (x,), lambda grad: (grad * active,))


def matmul_nt(a: Tensor, b: Tensor) -> Tensor:
    r"""Batched `a @ b^T` for `a` [..., n, d] and `b` [..., m, d]."""
    if a.shape[-1] != b.shape[-1]:
        raise DimensionError("matmul_nt", ["inner dimension"], a.shape, b.shape)
    if a.shape[:-2] != b.shape[:-2]:
        raise DimensionError("matmul_nt", ["batch"], a.shape, b.shape)
    b_t = np.swapaxes(b.data, -1, -2)

    def backward(grad):
        return grad @ b.data, np.swapaxes(grad, -1, -2) @ a.data

    return _result(a.data @ b_t, "matmul_nt", (a, b), backward)


def softmax_rows_masked(s: Tensor, mask: np.ndarray) -> Tensor:
    r"""
    Row-wise softmax of `s` [..., n, m] over the columns where `mask` [..., m] is 1.
    Masked columns are exactly 0 and each row of unmasked entries sums to 1.
    """
    mask = _check_mask("softmax_rows_masked", mask, s.shape)
    cols = mask[..., None, :] > 0
    shifted = np.where(cols, s.data, -np.inf)
    shifted = shifted - shifted.max(axis=-1, keepdims=True)
    expo = np.exp(shifted)
    out = expo / expo.sum(axis=-1, keepdims=True)

    def backward(grad):
        return (out * (grad - (grad * out).sum(axis=-1, keepdims=True)),)

    return _result(out, "softmax_rows_masked", (s,), backward)


def pool_rows(x: Tensor, mask: np.ndarray, kind: str) -> Tensor:
    r"""
    Max or mean pooling of each row of `x` [..., n, m] over unmasked columns.

    Parameters:
        x: Similarity matrix [..., n, m]
        mask: Column mask [..., m]
        kind: `"max"` or `"mean"`. Mean divides by the number of unmasked columns.

    Returns:
        Pooled rows [..., n]
    """
    mask = _check_mask("pool_rows", mask, x.shape)
    cols = mask[..., None, :] > 0

    if kind == "max":
        masked = np.where(cols, x.data, -np.inf)
        idx = np.argmax(masked, axis=-1)[..., None]
        out = np.take_along_axis(x.data, idx, axis=-1)[..., 0]

        def backward(grad):
            grad_x = np.zeros_like(x.data)
            np.put_along_axis(grad_x, idx, grad[..., None], axis=-1)
            return (grad_x,)

    elif kind == "mean":
        weights = mask[..., None, :] / mask.sum(axis=-1, keepdims=True)[..., None]
        out = (x.data * weights).sum(axis=-1)

        def backward(grad):
            return (grad[..., None] * weights,)

    else:
        raise ValueError(f"Unknown pooling `{kind}`, expected 'max' or 'mean'")

    return _result(out, f"pool_rows_{kind}", (x,), backward)


def scale(x: Tensor, weights: np.ndarray) -> Tensor:
    r"""Element-wise product with constant `weights` broadcastable to `x`."""
    weights = np.asarray(weights, dtype=np.float64)
    return _result(x.data * weights, "scale", (x,), lambda grad: (grad * weights,))


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    if len(tensors) == 0:
        raise DimensionError("concat", ["inputs"], (0,), (1,))
    sizes = [t.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]
    out = np.concatenate([t.data for t in tensors], axis=axis)
    return _result(out, "concat", tuple(tensors), lambda grad: tuple(np.split(grad, splits, axis=axis)))


def dropout(x: Tensor, rate: float, rng: Optional[np.random.Generator]) -> Tensor:
    r"""Inverted dropout. Identity when `rate == 0` or no generator is given."""
    if rate <= 0 or rng is None:
        return x
    keep = (rng.random(x.shape) >= rate) / (1.0 - rate)
    return _result(x.data * keep, "dropout", (x,), lambda grad: (grad * keep,))


def linear(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    r"""`x @ weight + bias` for `x` [..., d], `weight` [d, h] and `bias` [h]."""
    if x.shape[-1] != weight.shape[0]:
        raise DimensionError("linear", ["features", "weight rows"], x.shape, weight.shape)
    if bias.shape != (weight.shape[1],):
        raise DimensionError("linear", ["weight columns", "bias"], weight.shape, bias.shape)

    def backward(grad):
        grad_flat = grad.reshape(-1, weight.shape[1])
        x_flat = x.data.reshape(-1, weight.shape[0])
        return grad @ weight.data.T, x_flat.T @ grad_flat, grad_flat.sum(axis=0)

    return _result(x.data @ weight.data + bias.data, "linear", (x, weight, bias), backward)


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def softmax(x: Tensor) -> Tensor:
    r"""Softmax over the last axis."""
    out = np.exp(_log_softmax(x.data))

    def backward(grad):
        return (out * (grad - (grad * out).sum(axis=-1, keepdims=True)),)

    return _result(out, "softmax", (x,), backward)


def nll_loss(logits: Tensor, labels: np.ndarray) -> Tensor:
    r"""
    Negative log-likelihood of `labels` [B] under softmax(`logits` [B, C]),
    summed over the batch.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if logits.ndim != 2 or labels.shape != (logits.shape[0],):
        raise DimensionError("nll_loss", ["batch"], logits.shape, labels.shape)
    log_probs = _log_softmax(logits.data)
    rows = np.arange(labels.shape[0])
    out = -log_probs[rows, labels].sum()

    def backward(grad):
        grad_logits = np.exp(log_probs)
        grad_logits[rows, labels] -= 1.0
        return (grad * grad_logits,)

    return _result(np.asarray(out), "nll_loss", (logits,), backward)


def sum_all(x: Tensor) -> Tensor:
    return _result(np.asarray(x.data.sum()), "sum_all", (x,), lambda grad: (np.ones_like(x.data) * grad,))


def mul_scalar(x: Tensor, value: float) -> Tensor:
    return _result(x.data * value, "mul_scalar", (x,), lambda grad: (grad * value,))


def add_n(tensors: List[Tensor]) -> Tensor:
    r"""Sum of same-shape tensors."""
    shapes = {t.shape for t in tensors}
    if len(shapes) != 1:
        raise DimensionError("add_n", ["shape"], *shapes)
    out = np.sum([t.data for t in tensors], axis=0)
    return _result(out, "add_n", tuple(tensors), lambda grad: tuple(grad for _ in tensors))
