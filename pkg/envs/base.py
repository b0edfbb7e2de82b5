"""
Environment interface shared by the benchmarks
"""
import logging
from abc import ABC, abstractmethod
from typing import Any, NamedTuple, Optional

import numpy as np

logger = logging.getLogger(__name__)


class StepResult(NamedTuple):
    state: np.ndarray
    reward: float
    terminal: bool
    truncated: bool


class Environment(ABC):
    """Abstract base class for episodic environments with a discrete action set"""

    name: str = "environment"
    n_actions: int
    state_dim: int

    def __init__(self, rng: Optional[np.random.Generator] = None):
        self.rng = rng if rng is not None else np.random.default_rng()
        self.steps = 0

    @abstractmethod
    def reset(self) -> np.ndarray:
        """Start an episode; returns the encoded initial state"""
        pass

    @abstractmethod
    def step(self, action: int) -> StepResult:
        """Apply an action; returns the encoded next state"""
        pass

    @abstractmethod
    def encode_state(self, raw: Any) -> np.ndarray:
        """Feature vector fed to the networks"""
        pass

    @abstractmethod
    def reset_to(self, raw: Any) -> np.ndarray:
        """Start an episode from a given raw state"""
        pass

    def reseed(self, rng: np.random.Generator) -> None:
        self.rng = rng
