"""Central finite-difference checks of tape gradients."""

from typing import Callable, Dict, Mapping, Optional

import numpy as np

from tweetrank.nn.tensor import Tape, Tensor


def numerical_gradient(
    loss_fn: Callable[[], Tensor],
    param: Tensor,
    h: float = 1e-5,
    max_entries: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> Dict[int, float]:
    r"""
    Central differences `(f(p + h) - f(p - h)) / 2h` for the entries of `param`.

    Parameters:
        loss_fn: Computes the scalar loss from the current parameter values.
        param: Parameter to perturb in place (restored afterwards).
        h: Perturbation step.
        max_entries: Check only a random subset of this many entries.
        rng: Generator used to pick the subset.

    Returns:
        Mapping flat index -> numerical derivative
    """
    flat = param.data.reshape(-1)
    indices = np.arange(flat.size)
    if max_entries is not None and flat.size > max_entries:
        rng = rng if rng is not None else np.random.default_rng(0)
        indices = np.sort(rng.choice(flat.size, size=max_entries, replace=False))

    numerical = {}
    for idx in indices:
        original = flat[idx]
        flat[idx] = original + h
        plus = loss_fn().item()
        flat[idx] = original - h
        minus = loss_fn().item()
        flat[idx] = original
        numerical[int(idx)] = (plus - minus) / (2 * h)
    return numerical


def gradcheck(
    loss_fn: Callable[[], Tensor],
    params: Mapping[str, Tensor],
    h: float = 1e-5,
    atol: float = 1e-6,
    max_entries: Optional[int] = None,
    seed: int = 0,
) -> Dict[str, float]:
    r"""
    Compare tape gradients of `loss_fn` against central finite differences.

    The relative error of an entry is `|a - n| / max(|a| + |n|, atol)`.

    Returns:
        The maximum relative error per parameter name
    """
    for param in params.values():
        param.grad = None
    with Tape() as tape:
        loss = loss_fn()
        tape.backward(loss)
    analytic = {
        name: np.array(p.grad) if p.grad is not None else np.zeros_like(p.data) for name, p in params.items()
    }

    # Finite differences run without recording
    rng = np.random.default_rng(seed)
    errors = {}
    for name, param in params.items():
        numerical = numerical_gradient(loss_fn, param, h=h, max_entries=max_entries, rng=rng)
        grad_flat = analytic[name].reshape(-1)
        worst = 0.0
        for idx, num in numerical.items():
            ana = grad_flat[idx]
            err = abs(ana - num) / max(abs(ana) + abs(num), atol)
            worst = max(worst, err)
        errors[name] = worst
        param.grad = None
    return errors
