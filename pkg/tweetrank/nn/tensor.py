"""
Dense double-precision tensors with a recording tape for reverse-mode gradients.

A `Tensor` wraps a float64 numpy array. Operations in `tweetrank.nn.functional`
record themselves on the active `Tape` whenever one of their inputs requires a
gradient. `Tape.backward` then replays the records in reverse order.

!!! Example

    ``` python linenums="1"
        w = Tensor(np.ones(3), requires_grad=True, name="w")
        with Tape() as tape:
            loss = F.sum_all(F.relu(w))
            tape.backward(loss)
        w.grad  # array([1., 1., 1.])
    ```
"""

from contextvars import ContextVar
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from tweetrank.errors import GraphError, NumericError

ArrayLike = Union[np.ndarray, Sequence[float], float]

_ACTIVE_TAPE: ContextVar[Optional["Tape"]] = ContextVar("tweetrank_active_tape", default=None)


class Tensor:
    def __init__(
        self,
        data: ArrayLike,
        requires_grad: bool = False,
        name: Optional[str] = None,
    ):
        r"""
        Parameters:
            data: Values of the tensor. Always stored as a C-contiguous float64 array.
            requires_grad: Whether gradients should flow into this tensor.
            name: Optional name, used in error messages and checkpoints.
        """
        self.data = np.ascontiguousarray(np.asarray(data, dtype=np.float64))
        self.requires_grad = requires_grad
        self.name = name
        self.grad: Optional[np.ndarray] = None
        # Tensors produced by a recorded operation are not leaves
        self.is_leaf = True

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self.data

    def zero_grad(self):
        self.grad = np.zeros_like(self.data)

    def accumulate_grad(self, grad: np.ndarray):
        if self.grad is None:
            self.grad = np.array(grad, dtype=np.float64, copy=True)
        else:
            self.grad += grad

    def check_finite(self, where: str = "") -> "Tensor":
        if not np.all(np.isfinite(self.data)):
            raise NumericError(f"Non-finite values in `{self.name or 'tensor'}` {where}".strip())
        return self

    def __repr__(self) -> str:
        name = f"name={self.name!r}, " if self.name else ""
        return f"Tensor({name}shape={self.shape}, requires_grad={self.requires_grad})"


BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


@dataclass
class TapeRecord:
    op: str
    output: Tensor
    inputs: Tuple[Tensor, ...]
    backward: BackwardFn


class Tape:
    r"""
    Ordered record of the operations executed while it is active.

    The tape is a context manager: entering it makes it the active tape of the
    current thread/context, so concurrent evaluations each own their tape.
    """

    def __init__(self):
        self.records: List[TapeRecord] = []
        self._outputs = set()
        self._token = None

    def __enter__(self) -> "Tape":
        self._token = _ACTIVE_TAPE.set(self)
        return self

    def __exit__(self, exc_type, exc_value, traceback):
        _ACTIVE_TAPE.reset(self._token)
        self._token = None
        return False

    def __len__(self) -> int:
        return len(self.records)

    def record(self, op: str, output: Tensor, inputs: Iterable[Tensor], backward: BackwardFn):
        output.is_leaf = False
        self.records.append(TapeRecord(op=op, output=output, inputs=tuple(inputs), backward=backward))
        self._outputs.add(id(output))

    def clear(self):
        self.records = []
        self._outputs = set()

    def backward(self, loss: Tensor, clear: bool = True):
        r"""
        Fill the `grad` slot of every leaf tensor that requires a gradient with
        d(loss)/d(leaf). Gradients of intermediate tensors are discarded.

        Parameters:
            loss: A scalar produced by operations recorded on this tape.
            clear: Whether to clear the tape once gradients are computed.
        """
        if loss.size != 1:
            raise GraphError(f"The loss must be a scalar, got shape {loss.shape}")
        if id(loss) not in self._outputs:
            raise GraphError("The loss was not produced by an operation recorded on this tape")

        grads = {id(loss): np.ones_like(loss.data)}
        for rec in reversed(self.records):
            grad_out = grads.pop(id(rec.output), None)
            if grad_out is None:
                continue
            grad_inputs = rec.backward(grad_out)
            for tensor, grad in zip(rec.inputs, grad_inputs):
                if (grad is None) or (not tensor.requires_grad):
                    continue
                if tensor.is_leaf:
                    tensor.accumulate_grad(grad)
                elif id(tensor) in grads:
                    grads[id(tensor)] = grads[id(tensor)] + grad
                else:
                    grads[id(tensor)] = grad

        leaves = {id(t): t for rec in self.records for t in rec.inputs if t.is_leaf and t.grad is not None}
        for tensor in leaves.values():
            if not np.all(np.isfinite(tensor.grad)):
                raise NumericError(f"Non-finite gradient in `{tensor.name or 'tensor'}`")

        if clear:
            self.clear()


def active_tape() -> Optional[Tape]:
    """Return the tape of the current context, if any."""
    return _ACTIVE_TAPE.get()


def needs_recording(*inputs: Tensor) -> Optional[Tape]:
    """Return the active tape when at least one input requires a gradient."""
    tape = active_tape()
    if tape is None:
        return None
    if any(t.requires_grad for t in inputs):
        return tape
    return None
