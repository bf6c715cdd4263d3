from typing import Tuple

import numpy as np

from tweetrank.nn import functional as F
from tweetrank.nn.tensor import Tensor

REDUCTIONS = ("mean", "sum")


def pointwise_nll(logits: Tensor, labels: np.ndarray, reduction: str = "mean") -> Tuple[Tensor, float]:
    r"""
    Negative log-likelihood of the binary labels under the 2-way softmax.

    Parameters:
        logits: [B x 2]
        labels: [B], values in {0, 1}
        reduction: `"sum"` gives `-sum_i log o_i[y_i]`, `"mean"` divides it by B

    Returns:
        loss: The reduced loss, to differentiate
        total: The summed loss, for reporting
    """
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size > 0 and (labels.min() < 0 or labels.max() > 1):
        raise ValueError("Labels must be 0 or 1")
    if reduction not in REDUCTIONS:
        raise ValueError(f"Unknown reduction `{reduction}`, expected one of {REDUCTIONS}")
    total = F.nll_loss(logits, labels)
    loss = total if reduction == "sum" else F.mul_scalar(total, 1.0 / labels.shape[0])
    return loss, total.item()


def nll_from_probs(probs: np.ndarray, labels: np.ndarray) -> float:
    r"""`-sum_i log o_i[y_i]` from the probabilities `o_i[1]` of the relevant class."""
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    picked = np.where(labels == 1, probs, 1.0 - probs)
    return float(-np.log(picked).sum())
