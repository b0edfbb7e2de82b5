"""
FIFO experience replay
"""
import logging
from collections import deque
from dataclasses import dataclass
from typing import Deque, List, Optional

import numpy as np

from utils.errors import ConfigValidationError, NumericError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Experience:
    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray
    terminal: bool

    def __post_init__(self):
        if not np.isfinite(self.reward):
            raise NumericError(f"non-finite reward {self.reward}")


@dataclass
class ExperienceBatch:
    """Column-stacked minibatch"""
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_states: np.ndarray
    terminals: np.ndarray

    @classmethod
    def stack(cls, experiences: List[Experience]) -> "ExperienceBatch":
        return cls(
            states=np.stack([e.state for e in experiences]).astype(np.float64),
            actions=np.array([e.action for e in experiences], dtype=np.int64),
            rewards=np.array([e.reward for e in experiences], dtype=np.float64),
            next_states=np.stack([e.next_state for e in experiences]).astype(np.float64),
            terminals=np.array([e.terminal for e in experiences], dtype=bool),
        )

    def __len__(self) -> int:
        return len(self.actions)


class ReplayMemory:
    """Bounded buffer; the oldest experience is evicted first"""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ConfigValidationError("replay_capacity", "must be at least 1", capacity)
        self.capacity = capacity
        self.buffer: Deque[Experience] = deque(maxlen=capacity)

    def __len__(self) -> int:
        return len(self.buffer)

    def push(self, experience: Experience) -> "ReplayMemory":
        self.buffer.append(experience)
        return self

    def sample(self, batch_size: int, rng: np.random.Generator) -> Optional[ExperienceBatch]:
        """Uniform draw without replacement; None while fewer than batch_size experiences are stored"""
        if len(self.buffer) < batch_size:
            return None
        indices = rng.choice(len(self.buffer), size=batch_size, replace=False)
        return ExperienceBatch.stack([self.buffer[i] for i in indices])
