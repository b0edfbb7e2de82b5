"""
Adam optimiser and gradient clipping
"""
import logging
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from engine.tensor import Parameter
from utils.errors import DomainError, NumericError

logger = logging.getLogger(__name__)

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999


@dataclass
class AdamState:
    """Per-parameter moment estimates and the step counter"""
    first_moments: List[np.ndarray] = field(default_factory=list)
    second_moments: List[np.ndarray] = field(default_factory=list)
    step: int = 0

    @classmethod
    def for_parameters(cls, params: Sequence[Parameter]) -> "AdamState":
        return cls(
            first_moments=[np.zeros_like(p.data) for p in params],
            second_moments=[np.zeros_like(p.data) for p in params],
        )


def zero_grad(params: Sequence[Parameter]) -> None:
    for param in params:
        param.zero_grad()


def adam_step(params: Sequence[Parameter], state: AdamState, lr: float, eps: float) -> AdamState:
    """
    One bias-corrected Adam update. The whole step is refused when any
    gradient is non-finite; gradients are zeroed after a successful step.
    """
    if lr <= 0 or eps <= 0:
        raise DomainError(f"Adam needs lr > 0 and eps > 0 (got lr={lr}, eps={eps})")
    for param in params:
        if not np.all(np.isfinite(param.grad)):
            raise NumericError(f"non-finite gradient in {param.name or 'parameter'}; Adam step aborted")

    state.step += 1
    correction1 = 1.0 - ADAM_BETA1 ** state.step
    correction2 = 1.0 - ADAM_BETA2 ** state.step
    for param, m, v in zip(params, state.first_moments, state.second_moments):
        g = param.grad
        m *= ADAM_BETA1
        m += (1.0 - ADAM_BETA1) * g
        v *= ADAM_BETA2
        v += (1.0 - ADAM_BETA2) * g * g
        param.data -= lr * (m / correction1) / (np.sqrt(v / correction2) + eps)
    zero_grad(params)
    return state


def global_grad_norm(params: Sequence[Parameter]) -> float:
    return float(np.sqrt(sum(float(np.sum(p.grad * p.grad)) for p in params)))


def clip_grad_norm(params: Sequence[Parameter], max_norm: float) -> float:
    """Rescale gradients so their global L2 norm is at most max_norm; returns the norm before clipping"""
    if max_norm <= 0:
        raise DomainError(f"max_norm must be positive, got {max_norm}")
    total = global_grad_norm(params)
    if total > max_norm:
        scale = max_norm / total
        for param in params:
            param.grad = param.grad * scale
    return total


class Adam:
    """Adam bound to a parameter list"""

    def __init__(self, params: Sequence[Parameter], lr: float = 1e-4, eps: float = 1e-5):
        self.params = list(params)
        self.lr = lr
        self.eps = eps
        self.state = AdamState.for_parameters(self.params)

    def zero_grad(self) -> None:
        zero_grad(self.params)

    def step(self) -> None:
        adam_step(self.params, self.state, self.lr, self.eps)
