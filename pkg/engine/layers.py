"""
Fully connected layers, activations and Xavier initialisation
"""
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from engine.tensor import Parameter, Tensor, no_grad
from utils.errors import CheckpointError, DimensionError, NumericError

logger = logging.getLogger(__name__)

ACTIVATIONS: Tuple[str, ...] = ("relu", "elu", "identity", "positive")

# elu(x) + 1 + delta keeps integrands strictly positive
POSITIVITY_DELTA = 1e-6


def apply_activation(x: Tensor, tag: str) -> Tensor:
    if tag == "relu":
        return x.relu()
    if tag == "elu":
        return x.elu()
    if tag == "identity":
        return x
    if tag == "positive":
        return x.elu() + (1.0 + POSITIVITY_DELTA)
    raise ValueError(f"Unknown activation: {tag}")


def xavier_init(shape: Tuple[int, int], rng: np.random.Generator, name: Optional[str] = None) -> Parameter:
    """Uniform Glorot initialisation in [-sqrt(6/(rows+cols)), +sqrt(6/(rows+cols))]"""
    rows, cols = shape
    if rows < 1 or cols < 1:
        raise DimensionError(f"invalid parameter shape {shape}")
    bound = np.sqrt(6.0 / (rows + cols))
    return Parameter(rng.uniform(-bound, bound, size=(rows, cols)), name=name)


class Module:
    """Container discovering Parameters and sub-modules from its attributes"""

    def named_parameters(self, prefix: str = "") -> Dict[str, Parameter]:
        found: Dict[str, Parameter] = {}
        for attr, value in vars(self).items():
            path = f"{prefix}{attr}"
            if isinstance(value, Parameter):
                found[path] = value
            elif isinstance(value, Module):
                found.update(value.named_parameters(f"{path}."))
            elif isinstance(value, (list, tuple)):
                for index, item in enumerate(value):
                    if isinstance(item, Module):
                        found.update(item.named_parameters(f"{path}.{index}."))
        return found

    def parameters(self) -> List[Parameter]:
        return list(self.named_parameters().values())

    def zero_grad(self) -> None:
        for param in self.parameters():
            param.zero_grad()

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {name: param.data.copy() for name, param in self.named_parameters().items()}

    def load_state_dict(self, state: Dict[str, np.ndarray]) -> None:
        """Copy values in place so optimiser references stay valid"""
        params = self.named_parameters()
        missing = set(params) - set(state)
        unexpected = set(state) - set(params)
        if missing or unexpected:
            raise CheckpointError(f"parameter names differ (missing={sorted(missing)}, unexpected={sorted(unexpected)})")
        for name, param in params.items():
            values = np.asarray(state[name], dtype=np.float64)
            if values.shape != param.shape:
                raise CheckpointError(f"{name}: shape {values.shape} != {param.shape}")
            np.copyto(param.data, values)


class Linear(Module):
    """y = act(x @ W + b)"""

    def __init__(self, in_width: int, out_width: int, activation: str, rng: np.random.Generator):
        if activation not in ACTIVATIONS:
            raise ValueError(f"Unknown activation: {activation}")
        self.weight = xavier_init((in_width, out_width), rng)
        self.bias = Parameter(np.zeros(out_width))
        self.activation = activation

    def __call__(self, x: Tensor) -> Tensor:
        return apply_activation(x @ self.weight + self.bias, self.activation)


class Mlp(Module):
    """Stack of fully connected layers"""

    def __init__(self, widths: Sequence[int], activations: Sequence[str], rng: np.random.Generator):
        if len(widths) < 2:
            raise DimensionError("an Mlp needs at least an input and an output width")
        if len(activations) != len(widths) - 1:
            raise DimensionError(f"{len(widths) - 1} layers but {len(activations)} activation tags")
        self.layers = [
            Linear(widths[i], widths[i + 1], activations[i], rng)
            for i in range(len(widths) - 1)
        ]
        self.input_width = int(widths[0])
        self.output_width = int(widths[-1])

    def forward(self, x, record: bool = True) -> Tensor:
        x = Tensor.lift(x)
        if x.shape[-1] != self.input_width:
            raise DimensionError(f"input width {x.shape[-1]} != {self.input_width}")
        if not np.all(np.isfinite(x.data)):
            raise NumericError("non-finite network input")
        if not record:
            with no_grad():
                return self._run(x)
        return self._run(x)

    def _run(self, x: Tensor) -> Tensor:
        for layer in self.layers:
            x = layer(x)
        return x

    __call__ = forward
