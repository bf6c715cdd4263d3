from typing import Callable, Dict, List, Optional, Union

import numpy as np

from tweetrank.nn import functional as F
from tweetrank.nn.tensor import Tensor

SUPPORTED_ACTIVATION_MAP = {"relu": F.relu, "none": None}


def get_activation(activation: Union[type(None), str, Callable]) -> Optional[Callable]:
    """Resolve `activation` to a callable on tensors.

    Callables pass through unchanged. `None` and "none" mean identity and give `None`;
    "relu" (any case) gives `F.relu`. Other names fail an assertion.
    """
    if (activation is not None) and callable(activation):
        return activation
    if activation is None:
        return None
    key = activation.lower()
    assert key in SUPPORTED_ACTIVATION_MAP, f"Unhandled activation function {activation}"
    return SUPPORTED_ACTIVATION_MAP[key]


def glorot_uniform(shape, fan_in: int, fan_out: int, rng: np.random.Generator) -> np.ndarray:
    r"""Uniform in $$[-\sqrt{6 / (fan_{in} + fan_{out})}, \sqrt{6 / (fan_{in} + fan_{out})}]$$"""
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class FCLayer:
    def __init__(
        self,
        in_dim: int,
        out_dim: int,
        activation: Union[str, Callable] = "relu",
        name: str = "fc",
        rng: Optional[np.random.Generator] = None,
    ):
        r"""
        A fully connected layer `activation(x @ W + b)`.

        Parameters:
            in_dim: Input dimension of the layer
            out_dim: Output dimension of the layer
            activation: Activation function to use, `"relu"` or `"none"`
            name: Prefix of the parameter names
            rng: Generator for the Glorot-uniform weights. Without one, weights are zero.
                The bias always starts at zero.
        """
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.name = name
        self.activation = get_activation(activation)
        weight = np.zeros((in_dim, out_dim))
        if rng is not None:
            weight = glorot_uniform((in_dim, out_dim), in_dim, out_dim, rng)
        self.weight = Tensor(weight, requires_grad=True, name=f"{name}.weight")
        self.bias = Tensor(np.zeros(out_dim), requires_grad=True, name=f"{name}.bias")

    def parameters(self) -> Dict[str, Tensor]:
        return {self.weight.name: self.weight, self.bias.name: self.bias}

    def forward(self, h: Tensor) -> Tensor:
        h = F.linear(h, self.weight, self.bias)
        if self.activation is not None:
            h = self.activation(h)
        return h

    @staticmethod
    def param_count(in_dim: int, out_dim: int) -> int:
        return in_dim * out_dim + out_dim

    def __repr__(self):
        return f"{self.__class__.__name__}({self.in_dim} -> {self.out_dim})"


class MLP:
    def __init__(
        self,
        in_dim: int,
        hidden_dims: List[int],
        out_dim: int,
        activation: Union[str, Callable] = "relu",
        last_activation: Union[str, Callable] = "none",
        dropout: float = 0.0,
        name: str = "mlp",
        rng: Optional[np.random.Generator] = None,
    ):
        r"""
        Simple multi-layer perceptron. Dropout is applied on the input features only.

        Parameters:
            in_dim: Input dimension of the MLP
            hidden_dims: Dimensions of the hidden layers
            out_dim: Output dimension of the MLP
            activation: Activation of the hidden layers
            last_activation: Activation of the last layer
            dropout: Rate of the dropout applied on the inputs during training
            name: Prefix of the parameter names
            rng: Generator for the weight initialization
        """
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.dropout = dropout
        dims = [in_dim] + list(hidden_dims) + [out_dim]
        self.layers = []
        for ii in range(len(dims) - 1):
            is_last = ii == len(dims) - 2
            self.layers.append(
                FCLayer(
                    dims[ii],
                    dims[ii + 1],
                    activation=last_activation if is_last else activation,
                    name=f"{name}.{ii}",
                    rng=rng,
                )
            )

    def parameters(self) -> Dict[str, Tensor]:
        params = {}
        for layer in self.layers:
            params.update(layer.parameters())
        return params

    def forward(self, h: Tensor, rng: Optional[np.random.Generator] = None) -> Tensor:
        r"""
        Parameters:
            h: Input features [..., in_dim]
            rng: Dropout generator. Dropout is only applied when one is given.
        """
        h = F.dropout(h, self.dropout, rng)
        for layer in self.layers:
            h = layer.forward(h)
        return h

    @staticmethod
    def param_count(in_dim: int, hidden_dims: List[int], out_dim: int) -> int:
        dims = [in_dim] + list(hidden_dims) + [out_dim]
        return sum(FCLayer.param_count(dims[ii], dims[ii + 1]) for ii in range(len(dims) - 1))

    def __getitem__(self, idx: int) -> FCLayer:
        return self.layers[idx]

    def __repr__(self):
        dims = " -> ".join(str(layer.in_dim) for layer in self.layers)
        return f"{self.__class__.__name__}({dims} -> {self.out_dim})"


class ConvLayer:
    def __init__(
        self,
        in_dim: int,
        num_filters: int,
        kernel_size: int,
        name: str = "conv",
        rng: Optional[np.random.Generator] = None,
    ):
        r"""
        Same-length 1D convolution followed by a ReLU, with the padded rows
        zeroed again so padding never leaks into the next layer's windows.

        Parameters:
            in_dim: Channels of the input rows
            num_filters: Number of filters F
            kernel_size: Width k of the sliding window
            name: Prefix of the parameter names
            rng: Generator for the Glorot-uniform filters
        """
        self.in_dim = in_dim
        self.num_filters = num_filters
        self.kernel_size = kernel_size
        shape = (num_filters, kernel_size, in_dim)
        weight = np.zeros(shape)
        if rng is not None:
            weight = glorot_uniform(shape, kernel_size * in_dim, kernel_size * num_filters, rng)
        self.weight = Tensor(weight, requires_grad=True, name=f"{name}.weight")
        self.bias = Tensor(np.zeros(num_filters), requires_grad=True, name=f"{name}.bias")

    def parameters(self) -> Dict[str, Tensor]:
        return {self.weight.name: self.weight, self.bias.name: self.bias}

    def forward(self, h: Tensor, mask: np.ndarray) -> Tensor:
        h = F.conv1d_same(h, self.weight, self.bias)
        return F.mask_rows(F.relu(h), mask)

    @staticmethod
    def param_count(in_dim: int, num_filters: int, kernel_size: int) -> int:
        return num_filters * kernel_size * in_dim + num_filters


class ConvStack:
    def __init__(
        self,
        depth: int,
        in_dim: int,
        num_filters: int,
        kernel_size: int,
        name: str = "conv",
        rng: Optional[np.random.Generator] = None,
    ):
        r"""
        `depth` stacked `ConvLayer`. The first layer reads `in_dim` channels,
        the following ones read the `num_filters` channels of the previous layer.
        The same stack encodes queries and documents.
        """
        self.depth = depth
        self.layers = [
            ConvLayer(
                in_dim if h == 0 else num_filters,
                num_filters,
                kernel_size,
                name=f"{name}.{h}",
                rng=rng,
            )
            for h in range(depth)
        ]

    def parameters(self) -> Dict[str, Tensor]:
        params = {}
        for layer in self.layers:
            params.update(layer.parameters())
        return params

    def forward(self, h: Tensor, mask: np.ndarray) -> List[Tensor]:
        r"""
        Returns:
            The `depth + 1` representations: `h` itself, then the output of each layer
        """
        reps = [h]
        for layer in self.layers:
            reps.append(layer.forward(reps[-1], mask))
        return reps

    @staticmethod
    def param_count(depth: int, in_dim: int, num_filters: int, kernel_size: int) -> int:
        return sum(
            ConvLayer.param_count(in_dim if h == 0 else num_filters, num_filters, kernel_size)
            for h in range(depth)
        )
